//! The hp approximation space: geometric meshes and phase-carrying piecewise
//! polynomials on every side.

use num_complex::Complex64;

use crate::error::{HnaError, Result};
use crate::geometry::{ArcPoint, IncidentWave, PolygonModel, SideKind};

pub const DEFAULT_SIGMA: f64 = 0.15;

/// Mesh on `[0, A]` with points `0, sigma^{n-1} A, ..., sigma A, A`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricMesh {
    pub a: f64,
    pub n: usize,
    pub sigma: f64,
    pub points: Vec<f64>,
}

pub fn build_geometric_mesh(a: f64, n: usize, sigma: f64) -> Result<GeometricMesh> {
    if n == 0 {
        return Err(HnaError::Domain("geometric mesh needs at least one layer".into()));
    }
    if !(a > 0.0) || !(sigma > 0.0 && sigma < 1.0) {
        return Err(HnaError::Domain(format!(
            "geometric mesh needs A > 0 and sigma in (0, 1), got A = {a}, sigma = {sigma}"
        )));
    }
    let mut points = Vec::with_capacity(n + 1);
    points.push(0.0);
    for i in 1..=n {
        points.push(sigma.powi((n - i) as i32) * a);
    }
    Ok(GeometricMesh { a, n, sigma, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// `e^{iks}`
    Plus,
    /// `e^{-iks}`
    Minus,
    /// `e^{ikr(s)}`, `r(s) = sqrt(s^2 + L'^2)`
    Corner,
    /// No oscillatory factor (conventional elements).
    None,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Plus => "plus",
            Phase::Minus => "minus",
            Phase::Corner => "corner",
            Phase::None => "none",
        }
    }
}

/// Polynomial degree `n`, mesh layers and grading of the HNA space.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpaceParams {
    pub p: usize,
    pub n: usize,
    pub sigma: f64,
    /// Constant in `n >= c p`.
    pub c: f64,
}

impl SpaceParams {
    /// Defaults: `n = 2(p + 1)`, `sigma = 0.15`, `c = 2`.
    pub fn new(p: usize) -> Self {
        SpaceParams {
            p,
            n: 2 * (p + 1),
            sigma: DEFAULT_SIGMA,
            c: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(HnaError::Config("number of mesh layers must be positive".into()));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(HnaError::Config(format!("sigma must lie in (0, 1), got {}", self.sigma)));
        }
        if !(self.c > 0.0) || (self.n as f64) < self.c * self.p as f64 {
            return Err(HnaError::Config(format!(
                "need n >= c p with c > 0, got n = {}, c = {}, p = {}",
                self.n, self.c, self.p
            )));
        }
        Ok(())
    }

    /// `(p + 1)(2 n n_c + (n + 2) n_nc)`.
    pub fn dof_count(&self, n_convex: usize, n_nonconvex: usize) -> usize {
        (self.p + 1) * (2 * self.n * n_convex + (self.n + 2) * n_nonconvex)
    }
}

/// One basis function: an orthonormal Legendre polynomial on `support` times a phase.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HnaBasisFunction {
    pub side_index: usize,
    pub phase: Phase,
    /// Support in `s`.
    pub support: (f64, f64),
    /// Support in the anchored coordinate: `L - s` when `reversed`, else `s`.
    pub anchored: (f64, f64),
    pub degree: usize,
    /// Polynomial argument runs from the right end of the support (`L - s` direction).
    pub reversed: bool,
    pub side_length: f64,
    pub k: f64,
    /// `L'` of the partner side for corner phases, zero otherwise.
    pub l_prime: f64,
}

/// A run of consecutive basis functions sharing side, phase and support, with
/// degrees `0..ndeg`.
///
/// The support is `[lo, hi]` in `sbar = L - s` for reversed blocks and in `s`
/// otherwise, so that elements crowded at either end keep full precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementBlock {
    pub side_index: usize,
    pub phase: Phase,
    pub lo: f64,
    pub hi: f64,
    pub reversed: bool,
    pub side_length: f64,
    pub first_dof: usize,
    pub ndeg: usize,
    pub l_prime: f64,
}

/// Legendre values `P_0..P_{n-1}` and derivatives at `t`.
pub fn legendre_all(t: f64, n: usize, vals: &mut [f64], ders: &mut [f64]) {
    if n == 0 {
        return;
    }
    vals[0] = 1.0;
    ders[0] = 0.0;
    if n == 1 {
        return;
    }
    vals[1] = t;
    ders[1] = 1.0;
    for d in 2..n {
        let df = d as f64;
        vals[d] = ((2.0 * df - 1.0) * t * vals[d - 1] - (df - 1.0) * vals[d - 2]) / df;
        // P'_d = P'_{d-2} + (2d - 1) P_{d-1}
        ders[d] = ders[d - 2] + (2.0 * df - 1.0) * vals[d - 1];
    }
}

/// Phase factor and its `s`-derivative.
#[inline]
pub fn phase_value(phase: Phase, k: f64, l_prime: f64, s: f64) -> (Complex64, Complex64) {
    match phase {
        Phase::Plus => {
            let e = Complex64::from_polar(1.0, k * s);
            (e, Complex64::new(0.0, k) * e)
        }
        Phase::Minus => {
            let e = Complex64::from_polar(1.0, -k * s);
            (e, Complex64::new(0.0, -k) * e)
        }
        Phase::Corner => {
            let r = s.hypot(l_prime);
            let e = Complex64::from_polar(1.0, k * r);
            (e, Complex64::new(0.0, k * s / r) * e)
        }
        Phase::None => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
    }
}

impl ElementBlock {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Support in `s`.
    pub fn support(&self) -> (f64, f64) {
        if self.reversed {
            (self.side_length - self.hi, self.side_length - self.lo)
        } else {
            (self.lo, self.hi)
        }
    }

    pub fn contains(&self, p: ArcPoint) -> bool {
        let c = if self.reversed { p.sbar } else { p.s };
        c >= self.lo && c <= self.hi
    }

    /// Values and `s`-derivatives of all degrees at `p` (no support check).
    pub fn eval(&self, k: f64, p: ArcPoint, vals: &mut [Complex64], ders: &mut [Complex64]) {
        let h = self.hi - self.lo;
        let (c, dt) = if self.reversed { (p.sbar, -2.0 / h) } else { (p.s, 2.0 / h) };
        let t = 2.0 * (c - self.lo) / h - 1.0;
        let s = p.s;
        let mut pv = [0.0; 32];
        let mut pd = [0.0; 32];
        legendre_all(t, self.ndeg, &mut pv, &mut pd);
        let (ph, dph) = phase_value(self.phase, k, self.l_prime, s);
        for d in 0..self.ndeg {
            let norm = ((2 * d + 1) as f64 / h).sqrt();
            let q = norm * pv[d];
            let dq = norm * pd[d] * dt;
            vals[d] = ph * q;
            ders[d] = dph * q + ph * dq;
        }
    }
}

/// An ordered basis with its element structure.
#[derive(Debug, Clone)]
pub struct HnaSpace {
    pub k: f64,
    pub params: Option<SpaceParams>,
    pub blocks: Vec<ElementBlock>,
    pub basis: Vec<HnaBasisFunction>,
    pub side_lengths: Vec<f64>,
    /// Geometric meshes per side (plus-graded, minus-graded), in the side's `s` coordinate.
    pub meshes: Vec<Vec<GeometricMesh>>,
}

impl HnaSpace {
    pub fn n_dof(&self) -> usize {
        self.basis.len()
    }

    pub fn max_block_degree(&self) -> usize {
        self.blocks.iter().map(|b| b.ndeg).max().unwrap_or(0)
    }

    /// Every element endpoint on `side`, sorted along the side and de-duplicated.
    pub fn breakpoints(&self, side: usize) -> Vec<ArcPoint> {
        let len = self.side_lengths[side];
        let mut pts = vec![ArcPoint::from_s(0.0, len), ArcPoint::from_sbar(0.0, len)];
        for b in self.blocks.iter().filter(|b| b.side_index == side) {
            for c in [b.lo, b.hi] {
                pts.push(if b.reversed {
                    ArcPoint::from_sbar(c, len)
                } else {
                    ArcPoint::from_s(c, len)
                });
            }
        }
        pts.sort_by(|a, b| a.along_cmp(b));
        pts.dedup_by(|a, b| a.same_as(b, len));
        pts
    }

    /// Sum of `coefficients[j] * b_j` at `p` on `side`.
    pub fn combination(&self, coefficients: &[Complex64], side: usize, p: ArcPoint) -> Complex64 {
        let mut vals = [Complex64::new(0.0, 0.0); 32];
        let mut ders = [Complex64::new(0.0, 0.0); 32];
        let mut acc = Complex64::new(0.0, 0.0);
        for blk in self.blocks.iter().filter(|b| b.side_index == side && b.contains(p)) {
            blk.eval(self.k, p, &mut vals, &mut ders);
            for d in 0..blk.ndeg {
                acc += coefficients[blk.first_dof + d] * vals[d];
            }
        }
        acc
    }

    /// Adds a block on `[lo, hi]` in the anchored coordinate (`L - s` when `reversed`).
    #[allow(clippy::too_many_arguments)]
    fn push_block(&mut self, side_index: usize, phase: Phase, lo: f64, hi: f64, reversed: bool, ndeg: usize, l_prime: f64) {
        let first_dof = self.basis.len();
        let side_length = self.side_lengths[side_index];
        let blk = ElementBlock {
            side_index,
            phase,
            lo,
            hi,
            reversed,
            side_length,
            first_dof,
            ndeg,
            l_prime,
        };
        self.blocks.push(blk);
        for degree in 0..ndeg {
            self.basis.push(HnaBasisFunction {
                side_index,
                phase,
                support: blk.support(),
                anchored: (lo, hi),
                degree,
                reversed,
                side_length,
                k: self.k,
                l_prime,
            });
        }
    }

    /// Discontinuous piecewise polynomials of degree `degree` on a uniform mesh with at
    /// least `ppw_dof` elements per wavelength on every side. No oscillatory phase.
    pub fn uniform(poly: &PolygonModel, wave: &IncidentWave, ppw_dof: f64, degree: usize) -> Result<Self> {
        if !(ppw_dof > 0.0) {
            return Err(HnaError::Config(format!("elements per wavelength must be positive, got {ppw_dof}")));
        }
        if degree > 8 {
            return Err(HnaError::Config(format!("reference degree {degree} is too large")));
        }
        let mut space = HnaSpace {
            k: wave.k,
            params: None,
            blocks: Vec::new(),
            basis: Vec::new(),
            side_lengths: poly.sides.iter().map(|s| s.length).collect(),
            meshes: vec![Vec::new(); poly.sides.len()],
        };
        let lambda = wave.wavelength();
        for side in &poly.sides {
            let m = ((ppw_dof * side.length / lambda).ceil() as usize).max(1);
            let h = side.length / m as f64;
            for e in 0..m {
                let a = e as f64 * h;
                let b = if e + 1 == m { side.length } else { (e + 1) as f64 * h };
                space.push_block(side.index, Phase::None, a, b, false, degree + 1, 0.0);
            }
        }
        Ok(space)
    }
}

/// Builds the HNA space: on convex sides `e^{iks}` and `e^{-iks}` times piecewise
/// polynomials on meshes graded towards `s = 0` and `s = L`; on nonconvex sides
/// `e^{-iks}` on a mesh graded towards the far corner plus single polynomials times
/// `e^{iks}` and `e^{ikr(s)}` on the whole side.
pub fn build_space(poly: &PolygonModel, wave: &IncidentWave, params: SpaceParams) -> Result<HnaSpace> {
    params.validate()?;
    if params.p + 1 > 32 {
        return Err(HnaError::Config(format!("degree {} is too large", params.p)));
    }
    let ndeg = params.p + 1;
    let mut space = HnaSpace {
        k: wave.k,
        params: Some(params),
        blocks: Vec::new(),
        basis: Vec::new(),
        side_lengths: poly.sides.iter().map(|s| s.length).collect(),
        meshes: Vec::with_capacity(poly.sides.len()),
    };
    for side in &poly.sides {
        let len = side.length;
        let mesh = build_geometric_mesh(len, params.n, params.sigma)?;
        match side.kind {
            SideKind::Convex => {
                for w in mesh.points.windows(2) {
                    space.push_block(side.index, Phase::Plus, w[0], w[1], false, ndeg, 0.0);
                }
                for w in mesh.points.windows(2).rev() {
                    space.push_block(side.index, Phase::Minus, w[0], w[1], true, ndeg, 0.0);
                }
                space.meshes.push(vec![mesh.clone(), mesh]);
            }
            SideKind::Nonconvex => {
                let partner = side.partner_index.ok_or_else(|| HnaError::Classification {
                    side: side.index,
                    detail: "nonconvex side has no nonconvex partner".into(),
                })?;
                let l_prime = poly.sides[partner].length;
                space.push_block(side.index, Phase::Plus, 0.0, len, false, ndeg, 0.0);
                for w in mesh.points.windows(2).rev() {
                    space.push_block(side.index, Phase::Minus, w[0], w[1], true, ndeg, 0.0);
                }
                space.push_block(side.index, Phase::Corner, 0.0, len, false, ndeg, l_prime);
                space.meshes.push(vec![mesh]);
            }
            SideKind::Irregular => {
                return Err(HnaError::Classification {
                    side: side.index,
                    detail: "polygon is not in class C".into(),
                })
            }
        }
    }
    let expected = params.dof_count(
        poly.count_kind(SideKind::Convex),
        poly.count_kind(SideKind::Nonconvex),
    );
    debug_assert_eq!(space.n_dof(), expected);
    Ok(space)
}

/// `b(p)` for a single basis function; zero outside its support.
pub fn evaluate_basis(b: &HnaBasisFunction, p: ArcPoint) -> Complex64 {
    let blk = ElementBlock {
        side_index: b.side_index,
        phase: b.phase,
        lo: b.anchored.0,
        hi: b.anchored.1,
        reversed: b.reversed,
        side_length: b.side_length,
        first_dof: 0,
        ndeg: b.degree + 1,
        l_prime: b.l_prime,
    };
    if !blk.contains(p) {
        return Complex64::new(0.0, 0.0);
    }
    let mut vals = [Complex64::new(0.0, 0.0); 32];
    let mut ders = [Complex64::new(0.0, 0.0); 32];
    blk.eval(b.k, p, &mut vals, &mut ders);
    vals[b.degree]
}
