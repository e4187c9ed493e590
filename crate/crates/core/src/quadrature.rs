//! Gauss-Legendre rules, geometrically graded composite rules and the
//! singular/near-singular rules for double integrals over pairs of panels.

use std::f64::consts::PI;

use crate::error::{HnaError, Result};
use crate::geometry::{ArcPoint, PolygonModel, SideDescriptor, Vec2};

/// Grading ratio used by every graded rule.
pub const GRADING: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

impl QuadratureRule {
    pub fn integrate<T, F>(&self, f: F) -> T
    where
        F: Fn(f64) -> T,
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    {
        let mut acc = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(*x) * *w;
        }
        acc
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `m`-point Gauss-Legendre rule on `[a, b]`, nodes by Newton iteration.
pub fn gauss_legendre(m: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(HnaError::Domain("Gauss rule needs at least one point".into()));
    }
    if !(a < b) {
        return Err(HnaError::Domain(format!("Gauss rule needs a < b, got [{a}, {b}]")));
    }
    let (x, w) = gauss_reference(m);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(QuadratureRule {
        nodes: x.iter().map(|t| mid + half * t).collect(),
        weights: w.iter().map(|v| v * half).collect(),
        exactness_degree: 2 * m - 1,
    })
}

/// Nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_reference(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_m.
        let mut z = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if m % 2 == 1 {
        x[m / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(m: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if m == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Reference Gauss rule stored on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct UnitRule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl UnitRule {
    pub fn gauss(m: usize) -> Self {
        let (x, w) = gauss_reference(m.max(1));
        UnitRule {
            x: x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
            w: w.iter().map(|v| 0.5 * v).collect(),
        }
    }

    /// `pieces` equal intervals with `m` points each.
    pub fn composite(m: usize, pieces: usize) -> Self {
        let base = UnitRule::gauss(m);
        let h = 1.0 / pieces.max(1) as f64;
        let (mut x, mut w) = (Vec::new(), Vec::new());
        for j in 0..pieces.max(1) {
            for (t, v) in base.x.iter().zip(&base.w) {
                x.push(h * (j as f64 + t));
                w.push(h * v);
            }
        }
        UnitRule { x, w }
    }

    /// Composite rule on `[0, 1]` graded towards 0: `layers` geometric panels with
    /// ratio `GRADING`, `m` points each.
    pub fn graded(m: usize, layers: usize) -> Self {
        let base = UnitRule::gauss(m);
        let mut x = Vec::with_capacity(m * (layers + 1));
        let mut w = Vec::with_capacity(m * (layers + 1));
        let mut hi = 1.0;
        for j in 0..=layers {
            let lo = if j == layers { 0.0 } else { hi * GRADING };
            let h = hi - lo;
            for (t, v) in base.x.iter().zip(&base.w) {
                x.push(lo + h * t);
                w.push(h * v);
            }
            hi = lo;
        }
        UnitRule { x, w }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Largest panel width that `m` Gauss points resolve at `ppw` points per wavelength.
pub fn max_panel_width(k: f64, ppw: f64, m: usize) -> f64 {
    let lambda = 2.0 * PI / k;
    lambda * (2 * m - 1) as f64 / (2.0 * ppw)
}

/// Splits each interval between consecutive breakpoints into equal panels no wider
/// than `h_max`.
pub fn subdivide(breakpoints: &[f64], h_max: f64) -> Vec<(f64, f64)> {
    let mut panels = Vec::new();
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        let count = (((b - a) / h_max).ceil() as usize).max(1);
        let h = (b - a) / count as f64;
        for i in 0..count {
            let lo = if i == 0 { a } else { a + i as f64 * h };
            let hi = if i + 1 == count { b } else { a + (i + 1) as f64 * h };
            panels.push((lo, hi));
        }
    }
    panels
}

/// Composite Gauss rule on `[a, b]`, geometrically graded towards the flagged ends
/// and otherwise resolving the wavelength `2 pi / k` at `ppw` points per wavelength.
pub fn composite_graded(
    a: f64,
    b: f64,
    singular_ends: (bool, bool),
    k: f64,
    ppw: f64,
    layers: usize,
    order: usize,
) -> Result<QuadratureRule> {
    if !(a < b) {
        return Err(HnaError::Domain(format!("need a < b, got [{a}, {b}]")));
    }
    if !(ppw >= 4.0) {
        return Err(HnaError::Domain(format!("need at least 4 points per wavelength, got {ppw}")));
    }
    let m = order.max(8);
    let len = b - a;
    let mut pts = vec![a, b];
    for j in 1..=layers {
        let off = len * GRADING.powi(j as i32);
        if singular_ends.0 {
            pts.push(a + off);
        }
        if singular_ends.1 {
            pts.push(b - off);
        }
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let h_max = max_panel_width(k.max(1e-300), ppw, m);
    let unit = UnitRule::gauss(m);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (lo, hi) in subdivide(&pts, h_max) {
        for (t, w) in unit.x.iter().zip(&unit.w) {
            nodes.push(lo + (hi - lo) * t);
            weights.push((hi - lo) * w);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        exactness_degree: 2 * m - 1,
    })
}

/// Tunable quadrature settings shared by assembly and post-processing.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadConfig {
    /// Points per wavelength used to size panels.
    pub ppw: f64,
    /// Gauss points per panel (and per graded sub-panel).
    pub order: usize,
    /// Geometric layers in the graded singular rules.
    pub layers: usize,
    /// Panel pairs closer than `near_factor` times the larger panel are treated as near.
    pub near_factor: f64,
}

impl QuadConfig {
    /// Defaults for polynomial degree `p`: ppw 14, order 16, `2p + 4` layers. Products
    /// of test and trial phases oscillate at up to `2k`, which ppw 10 under-resolves.
    pub fn for_degree(p: usize) -> Self {
        QuadConfig {
            ppw: 14.0,
            order: 16,
            layers: 2 * p + 4,
            near_factor: 1.0,
        }
    }

    /// Every order and layer count doubled. `ppw` doubles too, which keeps the
    /// panels (nearly) unchanged since their width scales with `order / ppw`.
    pub fn doubled(&self) -> Self {
        QuadConfig {
            ppw: 2.0 * self.ppw,
            order: 2 * self.order,
            layers: 2 * self.layers,
            near_factor: self.near_factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ppw >= 4.0) {
            return Err(HnaError::Config(format!("ppw must be at least 4, got {}", self.ppw)));
        }
        if self.order < 2 || self.order > 256 {
            return Err(HnaError::Config(format!("quadrature order {} out of range", self.order)));
        }
        if !(self.near_factor > 0.0) {
            return Err(HnaError::Config("near factor must be positive".into()));
        }
        Ok(())
    }
}

/// A straight segment in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn point(&self, u: f64) -> Vec2 {
        self.a + (self.b - self.a) * u
    }

    pub fn distance_to_point(&self, x: Vec2) -> f64 {
        let d = self.b - self.a;
        let t = ((x - self.a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
        (x - self.point(t)).norm()
    }

    pub fn distance(&self, o: &Segment) -> f64 {
        self.distance_to_point(o.a)
            .min(self.distance_to_point(o.b))
            .min(o.distance_to_point(self.a))
            .min(o.distance_to_point(self.b))
    }
}

/// A point of the boundary stored as `anchor + offset`, with `anchor` the vertex
/// the point was measured from. Differences of points anchored at the same vertex
/// are exact up to the offsets' own rounding, however close both are to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub side: usize,
    pub arc: ArcPoint,
    pub anchor: Vec2,
    pub offset: Vec2,
}

impl BoundaryPoint {
    #[inline]
    pub fn position(&self) -> Vec2 {
        self.anchor + self.offset
    }

    /// `self - o` as a vector.
    #[inline]
    pub fn minus(&self, o: &BoundaryPoint) -> Vec2 {
        (self.anchor - o.anchor) + (self.offset - o.offset)
    }
}

/// Geometry of one side needed to place points on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideFrame {
    pub origin: Vec2,
    pub far_end: Vec2,
    /// `dx/ds`.
    pub tangent: Vec2,
    pub normal: Vec2,
    pub length: f64,
}

impl SideFrame {
    pub fn new(side: &SideDescriptor) -> Self {
        SideFrame {
            origin: side.origin(),
            far_end: side.far_end(),
            tangent: side.param_tangent(),
            normal: side.unit_normal,
            length: side.length,
        }
    }

    /// Point at coordinate `c`, measured from the far end when `from_far`.
    #[inline]
    pub fn point(&self, side: usize, c: f64, from_far: bool) -> BoundaryPoint {
        if from_far {
            BoundaryPoint {
                side,
                arc: ArcPoint::from_sbar(c, self.length),
                anchor: self.far_end,
                offset: self.tangent * (-c),
            }
        } else {
            BoundaryPoint {
                side,
                arc: ArcPoint::from_s(c, self.length),
                anchor: self.origin,
                offset: self.tangent * c,
            }
        }
    }

    pub fn at(&self, side: usize, p: ArcPoint) -> BoundaryPoint {
        if p.s <= p.sbar {
            self.point(side, p.s, false)
        } else {
            self.point(side, p.sbar, true)
        }
    }
}

/// Piece of a side between two consecutive knots, `a` before `b` in `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub side: usize,
    pub a: ArcPoint,
    pub b: ArcPoint,
    /// Knot indices of `a` and `b`; vertices are knots shared by two sides.
    pub knots: (usize, usize),
    /// Coordinates are measured from the far end of the side (`L - s`).
    pub from_far: bool,
    pub length: f64,
    pub segment: Segment,
    pub frame: SideFrame,
}

impl Panel {
    fn coords(&self) -> (f64, f64) {
        if self.from_far {
            (self.a.sbar, self.b.sbar)
        } else {
            (self.a.s, self.b.s)
        }
    }

    /// Point at fraction `t` of the panel, counted from `b` when `from_b`.
    #[inline]
    pub fn point(&self, t: f64, from_b: bool) -> BoundaryPoint {
        let (c0, c1) = self.coords();
        let c = if from_b { c1 + t * (c0 - c1) } else { c0 + t * (c1 - c0) };
        self.frame.point(self.side, c, self.from_far)
    }
}

/// Panels covering the whole boundary, side by side in increasing `s`.
#[derive(Debug, Clone)]
pub struct BoundaryMesh {
    pub panels: Vec<Panel>,
    pub knots: Vec<BoundaryPoint>,
    /// Knot indices on each side in increasing `s`, vertices included.
    pub side_knots: Vec<Vec<usize>>,
    pub frames: Vec<SideFrame>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Coincident,
    /// Panels sharing a knot; flags say whether it is the `b` end of each panel.
    Adjacent { at_b_x: bool, at_b_y: bool },
    Near,
    Far,
}

fn width_between(p: ArcPoint, q: ArcPoint, length: f64) -> (f64, bool) {
    let from_far = p.s + q.s > length;
    if from_far {
        (p.sbar - q.sbar, true)
    } else {
        (q.s - p.s, false)
    }
}

impl BoundaryMesh {
    /// Splits every side at `breakpoints[side]` (plus both ends) and then into equal
    /// panels no wider than `h_max`.
    pub fn build(poly: &PolygonModel, breakpoints: &[Vec<ArcPoint>], h_max: f64) -> Result<Self> {
        if breakpoints.len() != poly.sides.len() {
            return Err(HnaError::Domain("need one breakpoint list per side".into()));
        }
        if !(h_max > 0.0) {
            return Err(HnaError::Domain(format!("panel width must be positive, got {h_max}")));
        }
        let nv = poly.vertices.len();
        let mut knots: Vec<Option<BoundaryPoint>> = vec![None; nv];
        let mut panels = Vec::new();
        let mut side_knots = Vec::with_capacity(nv);
        let mut frames = Vec::with_capacity(nv);
        for side in &poly.sides {
            let len = side.length;
            let frame = SideFrame::new(side);
            frames.push(frame);
            let (v0, v1) = if side.origin_is_end() {
                ((side.index + 1) % nv, side.index)
            } else {
                (side.index, (side.index + 1) % nv)
            };
            let mut pts: Vec<ArcPoint> = breakpoints[side.index]
                .iter()
                .copied()
                .filter(|p| p.s > 0.0 && p.sbar > 0.0)
                .collect();
            pts.push(ArcPoint::from_s(0.0, len));
            pts.push(ArcPoint::from_sbar(0.0, len));
            pts.sort_by(|a, b| a.along_cmp(b));
            pts.dedup_by(|a, b| a.same_as(b, len));
            let mut ids = Vec::new();
            let mut arcs = Vec::new();
            for (w, pair) in pts.windows(2).enumerate() {
                let (p, q) = (pair[0], pair[1]);
                if w == 0 {
                    arcs.push(p);
                }
                let (width, from_far) = width_between(p, q, len);
                let count = ((width / h_max).ceil() as usize).max(1);
                for i in 1..count {
                    let t = i as f64 / count as f64;
                    let c = if from_far { p.sbar - t * width } else { p.s + t * width };
                    arcs.push(if from_far { ArcPoint::from_sbar(c, len) } else { ArcPoint::from_s(c, len) });
                }
                arcs.push(q);
            }
            for (i, arc) in arcs.iter().enumerate() {
                let id = if i == 0 {
                    v0
                } else if i + 1 == arcs.len() {
                    v1
                } else {
                    knots.push(None);
                    knots.len() - 1
                };
                if knots[id].is_none() {
                    knots[id] = Some(frame.at(side.index, *arc));
                }
                ids.push(id);
            }
            for i in 0..arcs.len() - 1 {
                let (p, q) = (arcs[i], arcs[i + 1]);
                let (length, from_far) = width_between(p, q, len);
                let mut panel = Panel {
                    side: side.index,
                    a: p,
                    b: q,
                    knots: (ids[i], ids[i + 1]),
                    from_far,
                    length,
                    segment: Segment { a: Vec2::new(0.0, 0.0), b: Vec2::new(0.0, 0.0) },
                    frame,
                };
                panel.segment = Segment {
                    a: panel.point(0.0, false).position(),
                    b: panel.point(0.0, true).position(),
                };
                panels.push(panel);
            }
            side_knots.push(ids);
        }
        Ok(BoundaryMesh {
            panels,
            knots: knots.into_iter().map(|k| k.expect("every knot is placed")).collect(),
            side_knots,
            frames,
        })
    }

    /// Knot on `side` at `p`, if there is one.
    pub fn find_knot(&self, side: usize, p: ArcPoint) -> Option<usize> {
        let len = self.frames[side].length;
        self.side_knots[side]
            .iter()
            .copied()
            .find(|&id| {
                let k = &self.knots[id];
                // vertex knots may have been placed from the neighbouring side
                let arc = if k.side == side {
                    k.arc
                } else if (k.anchor - self.frames[side].origin).norm() == 0.0 {
                    ArcPoint::from_s(0.0, len)
                } else {
                    ArcPoint::from_sbar(0.0, len)
                };
                arc.same_as(&p, len)
            })
    }

    pub fn classify(&self, i: usize, j: usize, near_factor: f64) -> PairKind {
        if i == j {
            return PairKind::Coincident;
        }
        let (p, q) = (&self.panels[i], &self.panels[j]);
        for (at_b_x, kx) in [(false, p.knots.0), (true, p.knots.1)] {
            for (at_b_y, ky) in [(false, q.knots.0), (true, q.knots.1)] {
                if kx == ky {
                    return PairKind::Adjacent { at_b_x, at_b_y };
                }
            }
        }
        if p.segment.distance(&q.segment) < near_factor * p.length.max(q.length) {
            PairKind::Near
        } else {
            PairKind::Far
        }
    }
}

/// Point in the unit square with weight: `(u, v, w)`.
pub type PairNode = [f64; 3];

/// Rule for `int_0^1 int_0^1 F(u, v) du dv` with a log singularity on the diagonal.
pub fn coincident_rule(m: usize, layers: usize) -> Vec<PairNode> {
    let zr = UnitRule::graded(m, layers);
    let tr = UnitRule::gauss(m);
    let mut out = Vec::with_capacity(2 * zr.len() * tr.len());
    for (z, wz) in zr.x.iter().zip(&zr.w) {
        let span = 1.0 - z;
        for (t, wt) in tr.x.iter().zip(&tr.w) {
            let v = t * span;
            let w = wz * wt * span;
            out.push([v + z, v, w]);
            out.push([v, v + z, w]);
        }
    }
    out
}

/// Rule for a singularity at the corner `(0, 0)`: Duffy split into two triangles
/// with the radial variable graded towards 0 and the angular variable split into
/// `pieces` equal intervals.
pub fn corner_rule(m: usize, layers: usize, pieces: usize) -> Vec<PairNode> {
    let rr = UnitRule::graded(m, layers);
    let xr = UnitRule::composite(m, pieces);
    let mut out = Vec::with_capacity(2 * rr.len() * xr.len());
    for (r, wr) in rr.x.iter().zip(&rr.w) {
        for (xi, wx) in xr.x.iter().zip(&xr.w) {
            let w = wr * wx * r;
            out.push([*r, r * xi, w]);
            out.push([r * xi, *r, w]);
        }
    }
    out
}

/// Tensor Gauss rule on sub-rectangles obtained by bisecting the larger of the two
/// panels until every pair is separated by `near_factor` times its larger size.
pub fn near_rule(px: &Segment, py: &Segment, m: usize, near_factor: f64) -> Vec<PairNode> {
    let unit = UnitRule::gauss(m);
    let mut out = Vec::new();
    let mut stack = vec![(0.0, 1.0, 0.0, 1.0, 0u32)];
    let (lx, ly) = (px.length(), py.length());
    while let Some((u0, u1, v0, v1, depth)) = stack.pop() {
        let sx = Segment {
            a: px.point(u0),
            b: px.point(u1),
        };
        let sy = Segment {
            a: py.point(v0),
            b: py.point(v1),
        };
        let hx = (u1 - u0) * lx;
        let hy = (v1 - v0) * ly;
        let dist = sx.distance(&sy);
        if dist >= near_factor * hx.max(hy) || depth >= 60 {
            for (a, wa) in unit.x.iter().zip(&unit.w) {
                for (b, wb) in unit.x.iter().zip(&unit.w) {
                    out.push([
                        u0 + (u1 - u0) * a,
                        v0 + (v1 - v0) * b,
                        wa * wb * (u1 - u0) * (v1 - v0),
                    ]);
                }
            }
        } else if hx >= hy {
            let um = 0.5 * (u0 + u1);
            stack.push((um, u1, v0, v1, depth + 1));
            stack.push((u0, um, v0, v1, depth + 1));
        } else {
            let vm = 0.5 * (v0 + v1);
            stack.push((u0, u1, vm, v1, depth + 1));
            stack.push((u0, u1, v0, vm, depth + 1));
        }
    }
    out
}

/// Angular subdivisions for the Duffy rule on two panels leaving a common point.
/// At an angle `g < pi/2` between them the kernel is singular at `exp(+-i g)` in the
/// angular variable, a distance `sin g` from `[0, 1]`.
pub fn angular_pieces(sx: &Segment, sy: &Segment) -> usize {
    let e1 = (sx.b - sx.a).normalized();
    let e2 = (sy.b - sy.a).normalized();
    let c = e1.dot(e2);
    if c <= 0.0 {
        return 1;
    }
    let sin = (1.0 - c * c).max(0.0).sqrt();
    ((1.0 / sin).ceil() as usize).clamp(1, 64)
}

/// Rule for two panels meeting at a common point, with both unit coordinates
/// measured from that point. `sx` and `sy` must start at the common point. When the
/// lengths differ by more than a factor 3/2 the longer panel is split so that the
/// Duffy part sees panels of equal length and the remainder is treated as near.
pub fn adjacent_pair_rule(sx: &Segment, sy: &Segment, cfg: &QuadConfig, corner: &[PairNode]) -> Vec<PairNode> {
    let (lx, ly) = (sx.length(), sy.length());
    let pieces = angular_pieces(sx, sy);
    let sharp;
    let corner = if pieces > 1 {
        sharp = corner_rule(cfg.order, cfg.layers, pieces);
        &sharp[..]
    } else {
        corner
    };
    if lx <= 1.5 * ly && ly <= 1.5 * lx {
        return corner.to_vec();
    }
    let swap = lx > ly;
    let (short, long) = if swap { (sy, sx) } else { (sx, sy) };
    let f = short.length() / long.length();
    let rest = Segment {
        a: long.point(f),
        b: long.b,
    };
    let mut out: Vec<PairNode> = corner.iter().map(|&[u, v, w]| [u, v * f, w * f]).collect();
    for [u, v, w] in near_rule(short, &rest, cfg.order, cfg.near_factor) {
        out.push([u, f + (1.0 - f) * v, w * (1.0 - f)]);
    }
    if swap {
        for n in out.iter_mut() {
            n.swap(0, 1);
        }
    }
    out
}

/// Rule for a pair of panels according to `kind`, with the ends the two unit
/// coordinates are measured from (`true` = from `b`). Not meant for `Far` pairs.
pub fn singular_pair_rule(kind: PairKind, px: &Segment, py: &Segment, cfg: &QuadConfig) -> (Vec<PairNode>, bool, bool) {
    match kind {
        PairKind::Coincident => (coincident_rule(cfg.order, cfg.layers), false, false),
        PairKind::Adjacent { at_b_x, at_b_y } => {
            let orient = |s: &Segment, at_b: bool| if at_b { Segment { a: s.b, b: s.a } } else { *s };
            let corner = corner_rule(cfg.order, cfg.layers, 1);
            (adjacent_pair_rule(&orient(px, at_b_x), &orient(py, at_b_y), cfg, &corner), at_b_x, at_b_y)
        }
        PairKind::Near | PairKind::Far => (near_rule(px, py, cfg.order, cfg.near_factor), false, false),
    }
}

/// Rule in `[0, 1]` for integrating over `py` against a target `x`. When `endpoint`
/// is `Some(at_b)` the target is that end of the panel and the rule is graded
/// towards it, with the coordinate measured from it; otherwise the panel is bisected
/// near `x` and the coordinate runs from `a`.
pub fn point_panel_rule(x: Vec2, py: &Segment, endpoint: Option<bool>, cfg: &QuadConfig) -> Vec<[f64; 2]> {
    if endpoint.is_some() {
        let g = UnitRule::graded(cfg.order, cfg.layers);
        return g.x.iter().zip(&g.w).map(|(t, w)| [*t, *w]).collect();
    }
    let len = py.length();
    let unit = UnitRule::gauss(cfg.order);
    let mut out = Vec::new();
    let mut stack = vec![(0.0, 1.0, 0u32)];
    while let Some((v0, v1, depth)) = stack.pop() {
        let seg = Segment {
            a: py.point(v0),
            b: py.point(v1),
        };
        let h = (v1 - v0) * len;
        if seg.distance_to_point(x) >= cfg.near_factor * h || depth >= 60 {
            for (t, w) in unit.x.iter().zip(&unit.w) {
                out.push([v0 + (v1 - v0) * t, w * (v1 - v0)]);
            }
        } else {
            let vm = 0.5 * (v0 + v1);
            stack.push((vm, v1, depth + 1));
            stack.push((v0, vm, depth + 1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn small_rules() {
        let r = gauss_legendre(1, 2.0, 4.0).unwrap();
        assert_eq!(r.nodes, vec![3.0]);
        assert_eq!(r.weights, vec![2.0]);
        let r = gauss_legendre(2, -1.0, 1.0).unwrap();
        assert!((r.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r.nodes[0] + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
        let r = gauss_legendre(3, 0.0, 1.0).unwrap();
        assert!((r.integrate(|x| x.powi(5)) - 1.0 / 6.0).abs() < 1e-15);
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn weights_and_exactness() {
        for m in [1, 2, 5, 16, 32, 64] {
            let r = gauss_legendre(m, -0.5, 2.0).unwrap();
            let sum: f64 = r.weights.iter().sum();
            assert!((sum - 2.5).abs() < 1e-13 * 2.5);
            assert!(r.weights.iter().all(|w| *w > 0.0));
            let deg = r.exactness_degree as i32;
            let exact = (2.0f64.powi(deg + 1) - (-0.5f64).powi(deg + 1)) / (deg + 1) as f64;
            let got = r.integrate(|x| x.powi(deg));
            assert!((got - exact).abs() <= 1e-12 * exact.abs(), "m={m}");
        }
    }

    #[test]
    fn log_integral() {
        let r = composite_graded(0.0, 1.0, (true, false), 1.0, 10.0, 16, 16).unwrap();
        let v = r.integrate(|x| x.ln());
        assert!((v + 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn oscillatory_integral() {
        let k = 200.0;
        let r = composite_graded(0.0, 1.0, (false, false), k, 10.0, 0, 16).unwrap();
        let got = r.integrate(|x| Complex64::from_polar(1.0, k * x));
        let want = (Complex64::from_polar(1.0, k) - 1.0) / Complex64::new(0.0, k);
        assert!((got - want).norm() < 1e-10 * want.norm());
    }

    #[test]
    fn node_count_scales_with_k() {
        let n1 = composite_graded(0.0, 10.0, (false, false), 20.0, 10.0, 0, 16).unwrap().len();
        let n2 = composite_graded(0.0, 10.0, (false, false), 40.0, 10.0, 0, 16).unwrap().len();
        assert!(n2 >= 2 * n1 - 16 && n2 <= 2 * n1 + 16);
    }

    #[test]
    fn double_log_integral() {
        // int_0^1 int_0^1 log|x - y| dy dx = -3/2
        let rule = coincident_rule(16, 16);
        let v: f64 = rule.iter().map(|[u, v, w]| w * (u - v).abs().ln()).sum();
        assert!((v + 1.5).abs() < 1e-8, "{v}");
    }

    #[test]
    fn corner_rule_integrates_log_distance() {
        // Two unit panels at a right angle: int int log sqrt(u^2 + v^2) du dv.
        let rule = corner_rule(16, 16, 1);
        let v: f64 = rule.iter().map(|[u, v, w]| w * (u * u + v * v).sqrt().ln()).sum();
        // Reference from the closed form: (1/2)(ln 2 - 3 + pi/2) = -0.36131...
        let want = 0.5 * (2f64.ln() - 3.0 + PI / 2.0);
        assert!((v - want).abs() < 1e-10, "{v} vs {want}");
    }

    #[test]
    fn sharp_corner_rule() {
        // Double-layer kernel n.(x - y) / |x - y|^2 across a corner of angle 0.15.
        let g: f64 = 0.15;
        let sx = Segment { a: Vec2::new(0.0, 0.0), b: Vec2::new(1.0, 0.0) };
        let sy = Segment { a: Vec2::new(0.0, 0.0), b: Vec2::new(g.cos(), g.sin()) };
        assert_eq!(angular_pieces(&sx, &sy), 7);
        let f = |rule: &[PairNode]| -> f64 {
            rule.iter()
                .map(|[u, v, w]| {
                    let d = sx.point(*u) - sy.point(*v);
                    w * d.y / d.dot(d)
                })
                .sum()
        };
        let want = f(&corner_rule(32, 20, 32));
        let got = f(&corner_rule(16, 16, angular_pieces(&sx, &sy)));
        assert!((got - want).abs() < 1e-11 * want.abs(), "{got} vs {want}");
        let plain = f(&corner_rule(16, 16, 1));
        assert!((plain - want).abs() > 1e-8 * want.abs());
    }

    #[test]
    fn near_rule_separates() {
        let px = Segment {
            a: Vec2::new(0.0, 0.0),
            b: Vec2::new(1.0, 0.0),
        };
        let py = Segment {
            a: Vec2::new(0.0, 0.01),
            b: Vec2::new(1.0, 0.01),
        };
                let rule = near_rule(&px, &py, 16, 1.0);
        let total: f64 = rule.iter().map(|n| n[2]).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // int int log((u - v)^2 + d^2)/2 du dv against a fine brute-force value.
        let d: f64 = 0.01;
        let got: f64 = rule.iter().map(|[u, v, w]| w * 0.5 * ((u - v).powi(2) + d * d).ln()).sum();
        // Closed form of int_0^1 int_0^1 (1/2) ln((u-v)^2 + d^2).
        let f = |t: f64| {
            // antiderivative in t of (1 - t) ln(t^2 + d^2), doubled by symmetry
            let a = t * (t * t + d * d).ln() - 2.0 * t + 2.0 * d * (t / d).atan();
            let b = 0.5 * ((t * t + d * d) * (t * t + d * d).ln() - t * t);
            a - b
        };
        let want = f(1.0) - f(0.0);
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn mesh_panels_and_adjacency() {
        let poly = crate::geometry::make_test_polygon();
        let bps: Vec<Vec<ArcPoint>> = poly
            .sides
            .iter()
            .map(|s| vec![ArcPoint::from_sbar(1e-9, s.length), ArcPoint::from_s(0.5, s.length)])
            .collect();
        let mesh = BoundaryMesh::build(&poly, &bps, 1.0).unwrap();
        let total: f64 = mesh.panels.iter().map(|p| p.length).sum();
        assert!((total - poly.perimeter).abs() < 1e-12);
        assert!(mesh.panels.iter().all(|p| p.length <= 1.0 + 1e-12));
        // the 1e-9 panel keeps its width to full relative precision
        let tiny = mesh.panels.iter().find(|p| p.length < 1e-8).unwrap();
        assert!((tiny.length - 1e-9).abs() < 1e-22);
        let end = tiny.point(0.0, true);
        let start = tiny.point(0.0, false);
        assert!((end.minus(&start).norm() - 1e-9).abs() < 1e-22);
        // every vertex is a knot shared by exactly two panels on different sides
        for v in 0..poly.vertices.len() {
            let users: Vec<usize> = (0..mesh.panels.len())
                .filter(|&i| mesh.panels[i].knots.0 == v || mesh.panels[i].knots.1 == v)
                .collect();
            assert_eq!(users.len(), 2);
            assert!(matches!(mesh.classify(users[0], users[1], 1.0), PairKind::Adjacent { .. }));
            assert!((mesh.knots[v].position() - poly.vertices[v]).norm() < 1e-14);
        }
        for i in 0..mesh.panels.len() {
            assert_eq!(mesh.classify(i, i, 1.0), PairKind::Coincident);
        }
        let far = mesh.classify(0, mesh.panels.len() / 2, 0.1);
        assert_eq!(far, PairKind::Far);
        let p = &mesh.panels[0];
        let k = mesh.find_knot(p.side, p.b).unwrap();
        assert_eq!(k, p.knots.1);
    }

    #[test]
    fn point_rule_log_endpoint() {
        let py = Segment {
            a: Vec2::new(0.0, 0.0),
            b: Vec2::new(2.0, 0.0),
        };
        let cfg = QuadConfig {
            ppw: 10.0,
            order: 16,
            layers: 16,
            near_factor: 1.0,
        };
        let rule = point_panel_rule(py.b, &py, Some(true), &cfg);
        // int_0^1 ln(2 t) dt = ln 2 - 1, t measured from b
        let v: f64 = rule.iter().map(|[t, w]| w * (2.0 * t).ln()).sum();
        assert!((v - (2f64.ln() - 1.0)).abs() < 1e-10);
    }
}
