//! Layer-potential kernels and Galerkin assembly of the two combined boundary
//! integral operators.
//!
//! Matrix entries are `<A b_j, b_i> = int conj(b_i(x)) (A b_j)(x) ds(x)`. The
//! boundary is cut into panels at every element endpoint of the space and then to
//! a wavelength-dependent width, so that on each panel every basis function is a
//! smooth polynomial times a phase. Panel pairs are integrated with tensor Gauss
//! rules when well separated and with graded rules when they touch or coincide.
//!
//! The star-combined operator contains `x . grad_Gamma S`; its tangential
//! derivative is moved onto the test function by integrating by parts along each
//! element, which leaves point values of the single-layer potential at element
//! endpoints.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::asymptotics::LeadingOrderTerm;
use crate::error::{HnaError, Result};
use crate::geometry::{IncidentWave, PolygonModel, Vec2};
use crate::hna_space::HnaSpace;
use crate::quadrature::{
    adjacent_pair_rule, coincident_rule, corner_rule, max_panel_width, near_rule, point_panel_rule, BoundaryMesh,
    BoundaryPoint, PairKind, PairNode, QuadConfig, Segment, UnitRule,
};
use crate::specfun::hankel1_01;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `Phi(x, y) = (i/4) H_0(k |x - y|)`.
pub fn fundamental_solution(x: Vec2, y: Vec2, k: f64) -> Result<Complex64> {
    let r = (x - y).norm();
    if !(r > 0.0) {
        return Err(HnaError::Singularity("fundamental solution at coincident points".into()));
    }
    if !(k > 0.0) {
        return Err(HnaError::Domain(format!("wavenumber must be positive, got {k}")));
    }
    Ok(0.25 * I * hankel1_01(k * r).0)
}

/// `dPhi(x, y)/dn(x) = -(ik/4) H_1(k |x - y|) (x - y) . n(x) / |x - y|`.
pub fn normal_derivative_kernel(x: Vec2, y: Vec2, n_x: Vec2, k: f64) -> Result<Complex64> {
    let d = x - y;
    let r = d.norm();
    if !(r > 0.0) {
        return Err(HnaError::Singularity("kernel at coincident points".into()));
    }
    if !(k > 0.0) {
        return Err(HnaError::Domain(format!("wavenumber must be positive, got {k}")));
    }
    Ok(-0.25 * I * k * hankel1_01(k * r).1 * (d.dot(n_x) / r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// `1/2 I + D' - i eta S`
    StandardCombined,
    /// `(x.n)(1/2 I + D') + x . grad_Gamma S + (1/2 - ik|x|) S`
    StarCombined,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OperatorConfig {
    pub kind: OperatorKind,
    /// Coupling parameter; `None` means `eta = k`.
    pub eta: Option<f64>,
    /// Origin for the star-combined operator.
    pub star_center: Vec2,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig::standard()
    }
}

impl OperatorConfig {
    pub fn standard() -> Self {
        OperatorConfig {
            kind: OperatorKind::StandardCombined,
            eta: None,
            star_center: Vec2::new(0.0, 0.0),
        }
    }

    pub fn star(center: Vec2) -> Self {
        OperatorConfig {
            kind: OperatorKind::StarCombined,
            eta: None,
            star_center: center,
        }
    }

    pub fn eta_for(&self, k: f64) -> f64 {
        self.eta.unwrap_or(k)
    }

    pub fn validate(&self, poly: &PolygonModel) -> Result<()> {
        match self.kind {
            OperatorKind::StandardCombined => {
                if let Some(eta) = self.eta {
                    if eta == 0.0 || !eta.is_finite() {
                        return Err(HnaError::Config(format!("coupling parameter must be finite and nonzero, got {eta}")));
                    }
                }
            }
            OperatorKind::StarCombined => {
                let m = poly.min_support(self.star_center);
                if !(m > 0.0) {
                    return Err(HnaError::Config(format!(
                        "polygon is not star-like about {} (min (x - c).n = {m:.3e})",
                        self.star_center
                    )));
                }
            }
        }
        Ok(())
    }

    /// `1/2 min (x - c).n` for the star-combined operator.
    pub fn coercivity_constant(&self, poly: &PolygonModel) -> Option<f64> {
        match self.kind {
            OperatorKind::StarCombined => Some(0.5 * poly.min_support(self.star_center)),
            OperatorKind::StandardCombined => None,
        }
    }

    fn channels(&self) -> usize {
        match self.kind {
            OperatorKind::StandardCombined => 1,
            OperatorKind::StarCombined => 2,
        }
    }
}

/// Counts reported with an assembly.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct AssemblyStats {
    pub panels: usize,
    pub nodes: usize,
    pub far_pairs: usize,
    pub near_pairs: usize,
    pub singular_pairs: usize,
}

/// Galerkin matrix of the operator, `<A Psi, b_i>` and `<f, b_i>`.
#[derive(Debug, Clone)]
pub struct AssembledOperator {
    pub matrix: DMatrix<Complex64>,
    pub psi_column: DVector<Complex64>,
    pub load: DVector<Complex64>,
    pub stats: AssemblyStats,
}

struct PanelNodes {
    points: Vec<BoundaryPoint>,
    weights: Vec<f64>,
    /// `[node][channel][i]`
    test: Vec<Complex64>,
    /// `[node][j]`, last entry `Psi`
    trial: Vec<Complex64>,
}

/// Everything needed to compute matrix entries for one space and operator.
pub struct Assembler<'a> {
    pub poly: &'a PolygonModel,
    pub space: &'a HnaSpace,
    pub wave: IncidentWave,
    pub leading: &'a [LeadingOrderTerm],
    pub op: OperatorConfig,
    pub quad: QuadConfig,
    pub mesh: BoundaryMesh,
    panel_blocks: Vec<Vec<usize>>,
    panel_dofs: Vec<Vec<usize>>,
    nodes: Vec<PanelNodes>,
    coincident: Vec<PairNode>,
    corner: Vec<PairNode>,
    eta: f64,
    nch: usize,
}

struct PanelRows {
    /// `[i][j]` with `j` over all `N + 1` columns.
    acc: Vec<Complex64>,
    load: Vec<Complex64>,
    far: usize,
    near: usize,
    singular: usize,
}

impl<'a> Assembler<'a> {
    pub fn new(
        poly: &'a PolygonModel,
        space: &'a HnaSpace,
        wave: IncidentWave,
        leading: &'a [LeadingOrderTerm],
        op: OperatorConfig,
        quad: QuadConfig,
    ) -> Result<Self> {
        quad.validate()?;
        op.validate(poly)?;
        if leading.len() != poly.sides.len() || space.side_lengths.len() != poly.sides.len() {
            return Err(HnaError::Config("space, leading terms and polygon disagree on the number of sides".into()));
        }
        if (space.k - wave.k).abs() > 1e-12 * wave.k {
            return Err(HnaError::Config("space and wave have different wavenumbers".into()));
        }
        let breakpoints: Vec<_> = (0..poly.sides.len()).map(|s| space.breakpoints(s)).collect();
        let h_max = max_panel_width(wave.k, quad.ppw, quad.order);
        let mesh = BoundaryMesh::build(poly, &breakpoints, h_max)?;
        let mut panel_blocks = Vec::with_capacity(mesh.panels.len());
        let mut panel_dofs = Vec::with_capacity(mesh.panels.len());
        for p in &mesh.panels {
            let mid = p.point(0.5, false).arc;
            let blocks: Vec<usize> = space
                .blocks
                .iter()
                .enumerate()
                .filter(|(_, b)| b.side_index == p.side && b.contains(mid))
                .map(|(i, _)| i)
                .collect();
            let dofs = blocks
                .iter()
                .flat_map(|&b| {
                    let blk = &space.blocks[b];
                    blk.first_dof..blk.first_dof + blk.ndeg
                })
                .collect();
            panel_blocks.push(blocks);
            panel_dofs.push(dofs);
        }
        let mut asm = Assembler {
            poly,
            space,
            wave,
            leading,
            op,
            quad,
            mesh,
            panel_blocks,
            panel_dofs,
            nodes: Vec::new(),
            coincident: coincident_rule(quad.order, quad.layers),
            corner: corner_rule(quad.order, quad.layers, 1),
            eta: op.eta_for(wave.k),
            nch: op.channels(),
        };
        let unit = UnitRule::gauss(quad.order);
        asm.nodes = (0..asm.mesh.panels.len())
            .map(|p| {
                let panel = &asm.mesh.panels[p];
                let n = asm.panel_dofs[p].len();
                let mut nodes = PanelNodes {
                    points: Vec::with_capacity(unit.len()),
                    weights: Vec::with_capacity(unit.len()),
                    test: vec![ZERO; unit.len() * asm.nch * n],
                    trial: vec![ZERO; unit.len() * (n + 1)],
                };
                for (q, (t, w)) in unit.x.iter().zip(&unit.w).enumerate() {
                    let x = panel.point(*t, false);
                    asm.test_rows(p, &x, &mut nodes.test[q * asm.nch * n..(q + 1) * asm.nch * n]);
                    asm.trial_values(p, &x, &mut nodes.trial[q * (n + 1)..(q + 1) * (n + 1)]);
                    nodes.points.push(x);
                    nodes.weights.push(w * panel.length);
                }
                nodes
            })
            .collect();
        Ok(asm)
    }

    pub fn n_dof(&self) -> usize {
        self.space.n_dof()
    }

    /// Basis values and `s`-derivatives of the dofs active on `panel` at `x`.
    fn basis_at(&self, panel: usize, x: &BoundaryPoint, vals: &mut [Complex64], ders: &mut [Complex64]) {
        let mut v = [ZERO; 32];
        let mut d = [ZERO; 32];
        let mut off = 0;
        for &b in &self.panel_blocks[panel] {
            let blk = &self.space.blocks[b];
            blk.eval(self.space.k, x.arc, &mut v, &mut d);
            vals[off..off + blk.ndeg].copy_from_slice(&v[..blk.ndeg]);
            ders[off..off + blk.ndeg].copy_from_slice(&d[..blk.ndeg]);
            off += blk.ndeg;
        }
    }

    /// Test weights multiplying each kernel channel, `[channel][i]`.
    fn test_rows(&self, panel: usize, x: &BoundaryPoint, out: &mut [Complex64]) {
        let n = self.panel_dofs[panel].len();
        let mut vals = [ZERO; 96];
        let mut ders = [ZERO; 96];
        self.basis_at(panel, x, &mut vals, &mut ders);
        match self.op.kind {
            OperatorKind::StandardCombined => {
                for i in 0..n {
                    out[i] = vals[i].conj();
                }
            }
            OperatorKind::StarCombined => {
                let frame = &self.mesh.frames[x.side];
                let xc = x.position() - self.op.star_center;
                let xn = xc.dot(frame.normal);
                let xt = xc.dot(frame.tangent);
                let cs = Complex64::new(-0.5, -self.wave.k * xc.norm());
                for i in 0..n {
                    out[i] = xn * vals[i].conj();
                    out[n + i] = cs * vals[i].conj() - xt * ders[i].conj();
                }
            }
        }
    }

    /// Trial values of the dofs active on `panel` at `y`, then `Psi(y)`.
    fn trial_values(&self, panel: usize, y: &BoundaryPoint, out: &mut [Complex64]) {
        let n = self.panel_dofs[panel].len();
        let mut ders = [ZERO; 96];
        self.basis_at(panel, y, out, &mut ders);
        out[n] = self.leading[y.side].evaluate(y.arc.s);
    }

    /// Kernel channels: `[D' - i eta S]` or `[D', S]`.
    #[inline]
    fn kernel(&self, x: &BoundaryPoint, y: &BoundaryPoint) -> [Complex64; 2] {
        let d = x.minus(y);
        let r = d.norm();
        // deep graded layers can round the separation to zero; those weights are negligible
        if r == 0.0 {
            return [ZERO, ZERO];
        }
        let k = self.wave.k;
        let (h0, h1) = hankel1_01(k * r);
        let ks = 0.25 * I * h0;
        let kd = if x.side == y.side {
            ZERO
        } else {
            let n = self.mesh.frames[x.side].normal;
            -0.25 * I * k * h1 * (d.dot(n) / r)
        };
        match self.op.kind {
            OperatorKind::StandardCombined => [kd - I * self.eta * ks, ZERO],
            OperatorKind::StarCombined => [kd, ks],
        }
    }

    fn columns(&self, q: usize) -> Vec<usize> {
        let mut cols = self.panel_dofs[q].clone();
        cols.push(self.n_dof());
        cols
    }

    /// Rows of the dofs active on panel `p`, integrated against the sources in `sources`.
    fn panel_rows(&self, p: usize, sources: &[usize]) -> PanelRows {
        let ncol = self.n_dof() + 1;
        let np = self.panel_dofs[p].len();
        let nch = self.nch;
        let mut acc = vec![ZERO; np * ncol];
        let mut load = vec![ZERO; np];
        let (mut far, mut near, mut singular) = (0, 0, 0);
        let xp = &self.nodes[p];
        let mut tmp = Vec::new();
        let mut trow = vec![ZERO; nch * np];
        let mut yrow = Vec::new();
        let mut c = vec![ZERO; np];
        for &q in sources {
            let nq = self.panel_dofs[q].len();
            let cols = self.columns(q);
            let kind = self.mesh.classify(p, q, self.quad.near_factor);
            if kind == PairKind::Far {
                far += 1;
                let yq = &self.nodes[q];
                let mx = xp.points.len();
                tmp.clear();
                tmp.resize(mx * nch * (nq + 1), ZERO);
                for (a, x) in xp.points.iter().enumerate() {
                    for (b, y) in yq.points.iter().enumerate() {
                        let ker = self.kernel(x, y);
                        let tr = &yq.trial[b * (nq + 1)..(b + 1) * (nq + 1)];
                        for ch in 0..nch {
                            let kw = ker[ch] * yq.weights[b];
                            let t = &mut tmp[(a * nch + ch) * (nq + 1)..(a * nch + ch + 1) * (nq + 1)];
                            for (tj, vj) in t.iter_mut().zip(tr) {
                                *tj += kw * vj;
                            }
                        }
                    }
                }
                for a in 0..mx {
                    let te = &xp.test[a * nch * np..(a + 1) * nch * np];
                    for ch in 0..nch {
                        let t = &tmp[(a * nch + ch) * (nq + 1)..(a * nch + ch + 1) * (nq + 1)];
                        for i in 0..np {
                            let ci = te[ch * np + i] * xp.weights[a];
                            let row = &mut acc[i * ncol..(i + 1) * ncol];
                            for (j, tj) in t.iter().enumerate() {
                                row[cols[j]] += ci * tj;
                            }
                        }
                    }
                }
                continue;
            }
            let (pp, pq) = (&self.mesh.panels[p], &self.mesh.panels[q]);
            let owned;
            let (rule, fx, fy): (&[PairNode], bool, bool) = match kind {
                PairKind::Coincident => {
                    singular += 1;
                    (&self.coincident, false, false)
                }
                PairKind::Adjacent { at_b_x, at_b_y } => {
                    singular += 1;
                    let orient = |s: &Segment, at_b: bool| if at_b { Segment { a: s.b, b: s.a } } else { *s };
                    owned = adjacent_pair_rule(
                        &orient(&pp.segment, at_b_x),
                        &orient(&pq.segment, at_b_y),
                        &self.quad,
                        &self.corner,
                    );
                    (&owned, at_b_x, at_b_y)
                }
                _ => {
                    near += 1;
                    owned = near_rule(&pp.segment, &pq.segment, self.quad.order, self.quad.near_factor);
                    (&owned, false, false)
                }
            };
            yrow.resize(nq + 1, ZERO);
            let scale = pp.length * pq.length;
            for &[u, v, w] in rule {
                let x = pp.point(u, fx);
                let y = pq.point(v, fy);
                let ker = self.kernel(&x, &y);
                self.test_rows(p, &x, &mut trow);
                self.trial_values(q, &y, &mut yrow);
                let ww = w * scale;
                for i in 0..np {
                    let mut ci = ZERO;
                    for ch in 0..nch {
                        ci += trow[ch * np + i] * ker[ch];
                    }
                    c[i] = ci * ww;
                }
                for i in 0..np {
                    let row = &mut acc[i * ncol..(i + 1) * ncol];
                    for (j, yj) in yrow.iter().enumerate() {
                        row[cols[j]] += c[i] * yj;
                    }
                }
            }
        }
        // identity part and load on the panel itself
        let idc = match self.op.kind {
            OperatorKind::StandardCombined => 0.5,
            OperatorKind::StarCombined => {
                let f = &self.mesh.frames[self.mesh.panels[p].side];
                0.5 * (f.origin - self.op.star_center).dot(f.normal)
            }
        };
        let cols = self.columns(p);
        let k = self.wave.k;
        for (a, x) in xp.points.iter().enumerate() {
            let tr = &xp.trial[a * (np + 1)..(a + 1) * (np + 1)];
            let w = xp.weights[a];
            let f = self.incident_data(x);
            for i in 0..np {
                let ti = tr[i].conj() * w;
                load[i] += f * ti;
                let row = &mut acc[i * ncol..(i + 1) * ncol];
                for (j, vj) in tr.iter().enumerate() {
                    row[cols[j]] += idc * ti * vj;
                }
            }
        }
        let _ = k;
        PanelRows {
            acc,
            load,
            far,
            near,
            singular,
        }
    }

    /// Right-hand side data `f` of the operator equation at `x`.
    fn incident_data(&self, x: &BoundaryPoint) -> Complex64 {
        let pos = x.position();
        let ui = self.wave.value(pos);
        let k = self.wave.k;
        match self.op.kind {
            OperatorKind::StandardCombined => {
                let n = self.mesh.frames[x.side].normal;
                Complex64::new(0.0, k * self.wave.d.dot(n) - self.eta) * ui
            }
            OperatorKind::StarCombined => {
                let xc = pos - self.op.star_center;
                Complex64::new(0.5, k * xc.dot(self.wave.d) - k * xc.norm()) * ui
            }
        }
    }

    /// `S b_j` for every dof (and `S Psi` last) at knot `knot`.
    fn single_layer_at_knot(&self, knot: usize) -> Vec<Complex64> {
        let ncol = self.n_dof() + 1;
        let mut out = vec![ZERO; ncol];
        let x = self.mesh.knots[knot];
        let xpos = x.position();
        let k = self.wave.k;
        let mut yrow = Vec::new();
        for (q, pq) in self.mesh.panels.iter().enumerate() {
            let endpoint = if pq.knots.0 == knot {
                Some(false)
            } else if pq.knots.1 == knot {
                Some(true)
            } else {
                None
            };
            let rule = point_panel_rule(xpos, &pq.segment, endpoint, &self.quad);
            let from_b = endpoint.unwrap_or(false);
            let nq = self.panel_dofs[q].len();
            yrow.resize(nq + 1, ZERO);
            let cols = self.columns(q);
            for [t, w] in rule {
                let y = pq.point(t, from_b);
                let r = x.minus(&y).norm();
                let g = 0.25 * I * hankel1_01(k * r).0 * (w * pq.length);
                self.trial_values(q, &y, &mut yrow);
                for (j, yj) in yrow.iter().enumerate() {
                    out[cols[j]] += g * yj;
                }
            }
        }
        out
    }

    /// Endpoint terms of the integration by parts, `[(x.t) conj(b_i) S b_j]` over every
    /// element, as `(dof, row)` pairs.
    fn endpoint_terms(&self) -> Result<Vec<(usize, Vec<Complex64>)>> {
        let mut cache: Vec<Option<Vec<Complex64>>> = vec![None; self.mesh.knots.len()];
        let mut out = Vec::new();
        let mut v = [ZERO; 32];
        let mut d = [ZERO; 32];
        for blk in &self.space.blocks {
            let side = blk.side_index;
            let len = blk.side_length;
            let frame = self.mesh.frames[side];
            let ends = if blk.reversed {
                [
                    crate::geometry::ArcPoint::from_sbar(blk.hi, len),
                    crate::geometry::ArcPoint::from_sbar(blk.lo, len),
                ]
            } else {
                [
                    crate::geometry::ArcPoint::from_s(blk.lo, len),
                    crate::geometry::ArcPoint::from_s(blk.hi, len),
                ]
            };
            let mut rows = vec![vec![ZERO; self.n_dof() + 1]; blk.ndeg];
            for (e, sign) in ends.iter().zip([-1.0, 1.0]) {
                let knot = self.mesh.find_knot(side, *e).ok_or_else(|| {
                    HnaError::Domain(format!("element endpoint s = {} on side {side} is not a knot", e.s))
                })?;
                if cache[knot].is_none() {
                    cache[knot] = Some(self.single_layer_at_knot(knot));
                }
                let srow = cache[knot].as_ref().unwrap();
                let xt = (self.mesh.knots[knot].position() - self.op.star_center).dot(frame.tangent);
                blk.eval(self.space.k, *e, &mut v, &mut d);
                for deg in 0..blk.ndeg {
                    let c = sign * xt * v[deg].conj();
                    for (r, s) in rows[deg].iter_mut().zip(srow) {
                        *r += c * s;
                    }
                }
            }
            for (deg, row) in rows.into_iter().enumerate() {
                out.push((blk.first_dof + deg, row));
            }
        }
        Ok(out)
    }

    /// Full matrix, `Psi` column and load vector.
    pub fn assemble(&self) -> Result<AssembledOperator> {
        let n = self.n_dof();
        let np = self.mesh.panels.len();
        let all: Vec<usize> = (0..np).collect();
        let blocks: Vec<PanelRows> = (0..np).into_par_iter().map(|p| self.panel_rows(p, &all)).collect();
        let mut matrix = DMatrix::<Complex64>::zeros(n, n);
        let mut psi_column = DVector::<Complex64>::zeros(n);
        let mut load = DVector::<Complex64>::zeros(n);
        let mut stats = AssemblyStats {
            panels: np,
            nodes: self.nodes.iter().map(|x| x.points.len()).sum(),
            ..Default::default()
        };
        for (p, rows) in blocks.iter().enumerate() {
            stats.far_pairs += rows.far;
            stats.near_pairs += rows.near;
            stats.singular_pairs += rows.singular;
            for (i, &dof) in self.panel_dofs[p].iter().enumerate() {
                let row = &rows.acc[i * (n + 1)..(i + 1) * (n + 1)];
                for j in 0..n {
                    matrix[(dof, j)] += row[j];
                }
                psi_column[dof] += row[n];
                load[dof] += rows.load[i];
            }
        }
        if self.op.kind == OperatorKind::StarCombined {
            for (dof, row) in self.endpoint_terms()? {
                for j in 0..n {
                    matrix[(dof, j)] += row[j];
                }
                psi_column[dof] += row[n];
            }
        }
        Ok(AssembledOperator {
            matrix,
            psi_column,
            load,
            stats,
        })
    }

    /// Single entry `<A b_j, b_i>`, through the same quadrature as `assemble`.
    pub fn entry(&self, i: usize, j: usize) -> Result<Complex64> {
        let n = self.n_dof();
        if i >= n || j >= n {
            return Err(HnaError::Domain(format!("entry ({i}, {j}) outside a {n} x {n} matrix")));
        }
        let sources: Vec<usize> = (0..self.mesh.panels.len()).filter(|&q| self.panel_dofs[q].contains(&j)).collect();
        let mut total = ZERO;
        for p in 0..self.mesh.panels.len() {
            if let Some(pos) = self.panel_dofs[p].iter().position(|&d| d == i) {
                let rows = self.panel_rows(p, &sources);
                total += rows.acc[pos * (n + 1) + j];
            }
        }
        if self.op.kind == OperatorKind::StarCombined {
            for (dof, row) in self.endpoint_terms()? {
                if dof == i {
                    total += row[j];
                }
            }
        }
        Ok(total)
    }
}

/// Assembles with the given settings; see [`Assembler`].
pub fn assemble_operator(
    poly: &PolygonModel,
    space: &HnaSpace,
    wave: IncidentWave,
    leading: &[LeadingOrderTerm],
    op: OperatorConfig,
    quad: QuadConfig,
) -> Result<AssembledOperator> {
    Assembler::new(poly, space, wave, leading, op, quad)?.assemble()
}

/// Largest relative change of the entries with `|a_ij| >= 1e-6 max |a|` between two
/// matrices of equal shape.
pub fn max_relative_drift(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.iter()
        .zip(b.iter())
        .filter(|(x, _)| x.norm() >= 1e-6 * scale)
        .map(|(x, y)| (x - y).norm() / x.norm())
        .fold(0.0, f64::max)
}
