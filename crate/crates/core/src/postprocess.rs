//! Boundary density, near field, far field and boundary norms from solved coefficients.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::asymptotics::LeadingOrderTerm;
use crate::geometry::{ArcPoint, IncidentWave, PolygonModel, Vec2};
use crate::hna_space::HnaSpace;
use crate::operators::fundamental_solution;
use crate::quadrature::{max_panel_width, point_panel_rule, BoundaryMesh, BoundaryPoint, QuadConfig, UnitRule};
use crate::{HnaError, Result};

/// Graded layers towards each vertex in boundary rules.
pub const CORNER_LAYERS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    BoundaryDensity,
    NearField,
    FarField,
}

/// Values on a strictly increasing parameter grid: global arc length for boundary
/// samples, angle in `[0, 2 pi)` otherwise.
#[derive(Debug, Clone)]
pub struct FieldSamples {
    pub kind: FieldKind,
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Side of each boundary sample.
    pub sides: Vec<usize>,
    /// `Psi + k phi` at each boundary sample.
    pub total: Vec<Complex64>,
}

impl FieldSamples {
    fn angular(kind: FieldKind, grid: Vec<f64>, values: Vec<Complex64>) -> Self {
        FieldSamples {
            kind,
            grid,
            values,
            sides: Vec::new(),
            total: Vec::new(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |self - other|`, on identical grids.
    pub fn max_abs_difference(&self, other: &FieldSamples) -> Result<f64> {
        if self.grid != other.grid {
            return Err(HnaError::Domain("samples are on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// `n` evenly spaced angles `2 pi j / n`.
pub fn angle_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

/// Unit vector at angle `t` counter-clockwise from the direction the incident wave
/// comes from.
pub fn observation_direction(wave: &IncidentWave, t: f64) -> Vec2 {
    (wave.d * -1.0).rotated(t)
}

/// Solved approximation `du/dn ~ Psi + k phi` with `phi` in `space`.
#[derive(Debug, Clone, Copy)]
pub struct Solution<'a> {
    pub poly: &'a PolygonModel,
    pub space: &'a HnaSpace,
    pub coefficients: &'a [Complex64],
    pub leading: &'a [LeadingOrderTerm],
    pub wave: IncidentWave,
}

impl<'a> Solution<'a> {
    pub fn new(
        poly: &'a PolygonModel,
        space: &'a HnaSpace,
        coefficients: &'a [Complex64],
        leading: &'a [LeadingOrderTerm],
        wave: IncidentWave,
    ) -> Result<Self> {
        if coefficients.len() != space.n_dof() {
            return Err(HnaError::Domain(format!(
                "{} coefficients for a space of dimension {}",
                coefficients.len(),
                space.n_dof()
            )));
        }
        if leading.len() != poly.sides.len() || space.side_lengths.len() != poly.sides.len() {
            return Err(HnaError::Domain("space, leading terms and polygon disagree on the number of sides".into()));
        }
        Ok(Solution {
            poly,
            space,
            coefficients,
            leading,
            wave,
        })
    }

    #[inline]
    pub fn phi(&self, side: usize, p: ArcPoint) -> Complex64 {
        self.space.combination(self.coefficients, side, p)
    }

    #[inline]
    pub fn normal_derivative(&self, side: usize, p: ArcPoint) -> Complex64 {
        self.leading[side].evaluate(p.s) + self.wave.k * self.phi(side, p)
    }

    /// Rule for integrals of the density over the boundary.
    pub fn boundary_rule(&self, quad: &QuadConfig) -> Result<BoundaryRule> {
        let bps: Vec<_> = (0..self.poly.sides.len()).map(|s| self.space.breakpoints(s)).collect();
        BoundaryRule::build(self.poly, &bps, self.wave.k, quad, CORNER_LAYERS)
    }

    /// Density `du/dn` at the nodes of `rule`.
    pub fn density_at(&self, rule: &BoundaryRule) -> Vec<Complex64> {
        rule.points.par_iter().map(|p| self.normal_derivative(p.side, p.arc)).collect()
    }
}

/// `phi` (and `Psi + k phi`) at `n` evenly spaced points of global arc length,
/// offset by half a spacing so that no sample falls on a corner.
pub fn boundary_density(sol: &Solution, n: usize) -> Result<FieldSamples> {
    if n == 0 {
        return Err(HnaError::Domain("empty boundary grid".into()));
    }
    let h = sol.poly.perimeter / n as f64;
    let grid: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * h).collect();
    boundary_density_at(sol, &grid)
}

/// `phi` and `Psi + k phi` at the given global arc lengths.
pub fn boundary_density_at(sol: &Solution, grid: &[f64]) -> Result<FieldSamples> {
    let located: Vec<(usize, f64)> = grid.iter().map(|&a| sol.poly.locate_arc(a)).collect::<Result<_>>()?;
    let (values, total): (Vec<_>, Vec<_>) = located
        .par_iter()
        .map(|&(side, s)| {
            let p = ArcPoint::from_s(s, sol.poly.sides[side].length);
            let phi = sol.phi(side, p);
            (phi, sol.leading[side].evaluate(s) + sol.wave.k * phi)
        })
        .unzip();
    Ok(FieldSamples {
        kind: FieldKind::BoundaryDensity,
        grid: grid.to_vec(),
        values,
        sides: located.iter().map(|x| x.0).collect(),
        total,
    })
}

/// Quadrature nodes over the whole boundary, grouped by panel. Panels ending at a
/// vertex are graded towards it.
#[derive(Debug, Clone)]
pub struct BoundaryRule {
    pub mesh: BoundaryMesh,
    pub points: Vec<BoundaryPoint>,
    pub weights: Vec<f64>,
    /// Node range of each panel.
    pub ranges: Vec<(usize, usize)>,
}

impl BoundaryRule {
    pub fn build(
        poly: &PolygonModel,
        breakpoints: &[Vec<ArcPoint>],
        k: f64,
        quad: &QuadConfig,
        corner_layers: usize,
    ) -> Result<Self> {
        let h_max = max_panel_width(k, quad.ppw, quad.order);
        let mesh = BoundaryMesh::build(poly, breakpoints, h_max)?;
        let nv = poly.vertices.len();
        let plain = UnitRule::gauss(quad.order);
        let graded = UnitRule::graded(quad.order, corner_layers);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut ranges = Vec::with_capacity(mesh.panels.len());
        for panel in &mesh.panels {
            let start = points.len();
            let (va, vb) = (panel.knots.0 < nv, panel.knots.1 < nv);
            let mut push = |rule: &UnitRule, lo: f64, hi: f64, from_b: bool| {
                for (t, w) in rule.x.iter().zip(&rule.w) {
                    points.push(panel.point(lo + (hi - lo) * t, from_b));
                    weights.push(w * (hi - lo) * panel.length);
                }
            };
            match (va, vb) {
                (true, true) => {
                    push(&graded, 0.0, 0.5, false);
                    push(&graded, 0.0, 0.5, true);
                }
                (true, false) => push(&graded, 0.0, 1.0, false),
                (false, true) => push(&graded, 0.0, 1.0, true),
                (false, false) => push(&plain, 0.0, 1.0, false),
            }
            ranges.push((start, points.len()));
        }
        Ok(BoundaryRule {
            mesh,
            points,
            weights,
            ranges,
        })
    }

    pub fn integrate(&self, f: impl Fn(&BoundaryPoint) -> f64 + Sync) -> f64 {
        // fixed summation order regardless of thread count
        let vals: Vec<f64> = self.points.par_iter().map(&f).collect();
        vals.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L1,
    L2,
}

/// `||f||` over the boundary with `rule`.
pub fn boundary_norm(rule: &BoundaryRule, f: impl Fn(&BoundaryPoint) -> Complex64 + Sync, norm: NormKind) -> f64 {
    match norm {
        NormKind::L1 => rule.integrate(|p| f(p).norm()),
        NormKind::L2 => rule.integrate(|p| f(p).norm_sqr()).sqrt(),
    }
}

/// Rule on the union of both spaces' breakpoints, for norms of differences.
pub fn comparison_rule(poly: &PolygonModel, a: &HnaSpace, b: &HnaSpace, quad: &QuadConfig) -> Result<BoundaryRule> {
    let bps: Vec<Vec<ArcPoint>> = (0..poly.sides.len())
        .map(|s| {
            let len = poly.sides[s].length;
            let mut pts = a.breakpoints(s);
            pts.extend(b.breakpoints(s));
            pts.sort_by(|x, y| x.along_cmp(y));
            pts.dedup_by(|x, y| x.same_as(y, len));
            pts
        })
        .collect();
    BoundaryRule::build(poly, &bps, a.k, quad, CORNER_LAYERS)
}

/// `G_ij = (b_j, b_i)` in `L2(boundary)`.
pub fn gram_matrix(poly: &PolygonModel, space: &HnaSpace, quad: &QuadConfig) -> Result<DMatrix<Complex64>> {
    let bps: Vec<_> = (0..poly.sides.len()).map(|s| space.breakpoints(s)).collect();
    let rule = BoundaryRule::build(poly, &bps, space.k, quad, CORNER_LAYERS)?;
    let n = space.n_dof();
    let mut g = DMatrix::<Complex64>::zeros(n, n);
    let mut vals = [Complex64::new(0.0, 0.0); 32];
    let mut ders = [Complex64::new(0.0, 0.0); 32];
    let mut active: Vec<(usize, Complex64)> = Vec::new();
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        active.clear();
        for blk in space.blocks.iter().filter(|b| b.side_index == p.side && b.contains(p.arc)) {
            blk.eval(space.k, p.arc, &mut vals, &mut ders);
            active.extend((0..blk.ndeg).map(|d| (blk.first_dof + d, vals[d])));
        }
        for &(i, bi) in &active {
            for &(j, bj) in &active {
                g[(i, j)] += bj * bi.conj() * *w;
            }
        }
    }
    Ok(g)
}

/// Error measures of `phi` against a reference `phi`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DensityErrors {
    pub l2_abs: f64,
    pub l2_rel: f64,
    pub l1_rel: f64,
    pub l2_reference: f64,
}

pub fn density_errors(candidate: &Solution, reference: &Solution, quad: &QuadConfig) -> Result<DensityErrors> {
    let rule = comparison_rule(candidate.poly, candidate.space, reference.space, quad)?;
    let diff = |p: &BoundaryPoint| candidate.phi(p.side, p.arc) - reference.phi(p.side, p.arc);
    let refv = |p: &BoundaryPoint| reference.phi(p.side, p.arc);
    let l2_abs = boundary_norm(&rule, diff, NormKind::L2);
    let l2_ref = boundary_norm(&rule, refv, NormKind::L2);
    let l1_abs = boundary_norm(&rule, diff, NormKind::L1);
    let l1_ref = boundary_norm(&rule, refv, NormKind::L1);
    Ok(DensityErrors {
        l2_abs,
        l2_rel: l2_abs / l2_ref,
        l1_rel: l1_abs / l1_ref,
        l2_reference: l2_ref,
    })
}

/// Density at the nodes of a rule, with the rule, ready for field evaluation.
pub struct DensityQuadrature<'a> {
    pub sol: Solution<'a>,
    pub rule: BoundaryRule,
    pub density: Vec<Complex64>,
    pub quad: QuadConfig,
}

impl<'a> DensityQuadrature<'a> {
    pub fn new(sol: Solution<'a>, quad: QuadConfig) -> Result<Self> {
        quad.validate()?;
        let rule = sol.boundary_rule(&quad)?;
        let density = sol.density_at(&rule);
        Ok(DensityQuadrature {
            sol,
            rule,
            density,
            quad,
        })
    }

    /// `u^s(x) = -int Phi(x, y) du/dn(y) ds(y)` at a point off the boundary.
    pub fn scattered(&self, x: Vec2) -> Result<Complex64> {
        let k = self.sol.wave.k;
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, panel) in self.rule.mesh.panels.iter().enumerate() {
            let dist = panel.segment.distance_to_point(x);
            if dist == 0.0 {
                return Err(HnaError::Domain(format!("target ({}, {}) lies on the boundary", x.x, x.y)));
            }
            if dist >= self.quad.near_factor * panel.length {
                let (a, b) = self.rule.ranges[p];
                for q in a..b {
                    let y = self.rule.points[q].position();
                    acc += fundamental_solution(x, y, k)? * self.density[q] * self.rule.weights[q];
                }
            } else {
                for [t, w] in point_panel_rule(x, &panel.segment, None, &self.quad) {
                    let y = panel.point(t, false);
                    let dn = self.sol.normal_derivative(y.side, y.arc);
                    acc += fundamental_solution(x, y.position(), k)? * dn * (w * panel.length);
                }
            }
        }
        Ok(-acc)
    }

    /// Total field `u^i + u^s`.
    pub fn total(&self, x: Vec2) -> Result<Complex64> {
        Ok(self.sol.wave.value(x) + self.scattered(x)?)
    }

    /// `F(xhat) = -int exp(-ik xhat.y) du/dn(y) ds(y)`.
    pub fn far_field_at(&self, xhat: Vec2) -> Complex64 {
        let k = self.sol.wave.k;
        let mut acc = Complex64::new(0.0, 0.0);
        for ((y, dn), w) in self.rule.points.iter().zip(&self.density).zip(&self.rule.weights) {
            acc += Complex64::from_polar(1.0, -k * xhat.dot(y.position())) * dn * w;
        }
        -acc
    }
}

/// Circle used for near-field errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

impl Circle {
    /// Radius `3 pi` about the vertex centroid.
    pub fn default_for(poly: &PolygonModel) -> Self {
        Circle {
            center: poly.vertex_centroid(),
            radius: 3.0 * PI,
        }
    }

    pub fn encloses(&self, poly: &PolygonModel) -> bool {
        poly.vertices.iter().all(|v| (*v - self.center).norm() < self.radius)
    }
}

/// Total field `u_N` at `x(t) = center + radius * observation_direction(t)`.
pub fn near_field(dq: &DensityQuadrature, circle: Circle, grid: &[f64]) -> Result<FieldSamples> {
    if !circle.encloses(dq.sol.poly) {
        return Err(HnaError::InvalidGeometry(format!(
            "circle of radius {} about ({}, {}) does not enclose the polygon",
            circle.radius, circle.center.x, circle.center.y
        )));
    }
    let values = grid
        .par_iter()
        .map(|&t| dq.total(circle.center + observation_direction(&dq.sol.wave, t) * circle.radius))
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldSamples::angular(FieldKind::NearField, grid.to_vec(), values))
}

/// Far-field pattern `F_N(xhat(t))`.
pub fn far_field(dq: &DensityQuadrature, grid: &[f64]) -> FieldSamples {
    let values = grid
        .par_iter()
        .map(|&t| dq.far_field_at(observation_direction(&dq.sol.wave, t)))
        .collect();
    FieldSamples::angular(FieldKind::FarField, grid.to_vec(), values)
}

/// `Psi` at `n` evenly spaced arc lengths, as `(side, global arc, value)`.
pub fn leading_samples(poly: &PolygonModel, leading: &[LeadingOrderTerm], n: usize) -> Result<Vec<(usize, f64, Complex64)>> {
    let h = poly.perimeter / n.max(1) as f64;
    (0..n)
        .map(|j| {
            let a = (j as f64 + 0.5) * h;
            let (side, s) = poly.locate_arc(a)?;
            Ok((side, a, leading[side].evaluate(s)))
        })
        .collect()
}
