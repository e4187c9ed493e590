//! Experiment driver: single solves, convergence sweeps, field outputs, the
//! reference solver and the validation report. Everything writes CSV or JSON into
//! the configured output directory.

pub mod config;
pub mod validation;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::asymptotics::{leading_order_all, LeadingOrderTerm};
use crate::galerkin_solver::{self, AssemblyMetadata};
use crate::geometry::{IncidentWave, PolygonModel};
use crate::hna_space::{build_space, HnaSpace};
use crate::operators::{assemble_operator, max_relative_drift};
use crate::postprocess::{
    angle_grid, boundary_density, density_errors, far_field, leading_samples, near_field, Circle, DensityQuadrature,
    FieldSamples, Solution,
};
use crate::reference_bem::{solve_reference, ReferenceConfig, ReferenceSolution};
use crate::specfun::{bessel_01, fresnel_fr, oracle};
use crate::{HnaError, Result};

pub use config::{builtin_polygon, parse_angle, ExperimentConfig};

/// One solved HNA problem.
#[derive(Debug, Clone)]
pub struct HnaRun {
    pub alpha: f64,
    pub k: f64,
    pub p: usize,
    pub wave: IncidentWave,
    pub space: HnaSpace,
    pub leading: Vec<LeadingOrderTerm>,
    pub coefficients: Vec<Complex64>,
    pub cond: Option<f64>,
    pub residual: f64,
    pub metadata: AssemblyMetadata,
    pub wall_seconds: f64,
}

impl HnaRun {
    pub fn solution<'a>(&'a self, poly: &'a PolygonModel) -> Result<Solution<'a>> {
        Solution::new(poly, &self.space, &self.coefficients, &self.leading, self.wave)
    }

    pub fn n_dof(&self) -> usize {
        self.space.n_dof()
    }
}

/// Options for [`solve_hna`] beyond the experiment configuration.
#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub condition_number: bool,
    pub dump_system: Option<PathBuf>,
}

pub fn solve_hna(poly: &PolygonModel, alpha: f64, k: f64, p: usize, cfg: &ExperimentConfig, opts: &SolveOptions) -> Result<HnaRun> {
    let t0 = Instant::now();
    let wave = IncidentWave::new(k, alpha)?;
    let space = build_space(poly, &wave, cfg.space_params(p))?;
    let leading = leading_order_all(poly, &wave)?;
    let op = cfg.operator_config(poly)?;
    let mut sys = galerkin_solver::assemble(poly, &space, wave, &leading, op, cfg.quad(p))?;
    if let Some(path) = &opts.dump_system {
        sys.dump(path)?;
    }
    let coefficients: Vec<Complex64> = sys.solve()?.iter().cloned().collect();
    let residual = sys.relative_residual().unwrap_or(f64::NAN);
    let cond = opts.condition_number.then(|| sys.condition_number());
    Ok(HnaRun {
        alpha: wave.alpha,
        k,
        p,
        wave,
        space,
        leading,
        coefficients,
        cond,
        residual,
        metadata: sys.metadata,
        wall_seconds: t0.elapsed().as_secs_f64(),
    })
}

/// Largest relative change of the Galerkin matrix entries when the quadrature
/// settings are doubled.
pub fn quad_selfcheck(poly: &PolygonModel, alpha: f64, k: f64, p: usize, cfg: &ExperimentConfig) -> Result<f64> {
    let wave = IncidentWave::new(k, alpha)?;
    let space = build_space(poly, &wave, cfg.space_params(p))?;
    let leading = leading_order_all(poly, &wave)?;
    let op = cfg.operator_config(poly)?;
    let quad = cfg.quad(p);
    let a = assemble_operator(poly, &space, wave, &leading, op, quad)?;
    let b = assemble_operator(poly, &space, wave, &leading, op, quad.doubled())?;
    Ok(max_relative_drift(&a.matrix, &b.matrix))
}

/// `N / (L / lambda)`.
pub fn dof_per_wavelength(n: usize, poly: &PolygonModel, k: f64) -> f64 {
    n as f64 / (poly.perimeter * k / (2.0 * PI))
}

fn label(alpha: f64, k: f64, p: usize) -> String {
    format!("a{:.4}_k{}_p{}", alpha, k, p)
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> HnaError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => HnaError::Io(io),
        other => HnaError::Parse(format!("csv: {other:?}")),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryRow {
    pub side: usize,
    pub s: f64,
    pub s_over_2pi: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleRow {
    pub t: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PsiRow {
    pub side: usize,
    pub s: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRow {
    pub alpha: f64,
    pub k: f64,
    pub p: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub l2_abs: f64,
    pub l2_rel: f64,
    pub l1_rel: f64,
    pub cond: f64,
    pub dof_per_wavelength: f64,
    pub wall_seconds: f64,
    /// `log(e(k_i) / e(k_{i-1})) / log(k_i / k_{i-1})` for the absolute L2 error.
    pub mu: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldErrorRow {
    pub alpha: f64,
    pub k: f64,
    pub p: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub circle_rel_max_error: f64,
    pub farfield_abs_max_error: f64,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceRow {
    pub side: usize,
    pub side_kind: String,
    pub phase: String,
    pub s_lo: f64,
    pub s_hi: f64,
    pub degree: usize,
    pub first_dof: usize,
}

pub fn boundary_rows(samples: &FieldSamples) -> Vec<BoundaryRow> {
    samples
        .grid
        .iter()
        .zip(&samples.sides)
        .zip(&samples.values)
        .map(|((s, side), v)| BoundaryRow {
            side: *side,
            s: *s,
            s_over_2pi: s / (2.0 * PI),
            re: v.re,
            im: v.im,
            abs: v.norm(),
        })
        .collect()
}

pub fn angle_rows(samples: &FieldSamples) -> Vec<AngleRow> {
    samples
        .grid
        .iter()
        .zip(&samples.values)
        .map(|(t, v)| AngleRow {
            t: *t,
            re: v.re,
            im: v.im,
            abs: v.norm(),
        })
        .collect()
}

pub fn write_boundary_csv(path: &Path, samples: &FieldSamples) -> Result<()> {
    write_rows(path, &boundary_rows(samples))
}

pub fn write_angle_csv(path: &Path, samples: &FieldSamples) -> Result<()> {
    write_rows(path, &angle_rows(samples))
}

pub fn write_errors_csv(path: &Path, rows: &[ErrorRow]) -> Result<()> {
    write_rows(path, rows)
}

/// Fills `mu` between successive wavenumbers of each `(alpha, p)` series.
pub fn fill_mu(rows: &mut [ErrorRow]) {
    for i in 0..rows.len() {
        let prev = (0..i)
            .rev()
            .find(|&j| rows[j].alpha == rows[i].alpha && rows[j].p == rows[i].p && rows[j].k < rows[i].k);
        rows[i].mu = prev.and_then(|j| {
            let (a, b) = (&rows[j], &rows[i]);
            let mu = (b.l2_abs / a.l2_abs).ln() / (b.k / a.k).ln();
            mu.is_finite().then_some(mu)
        });
    }
}

fn failed_error_row(alpha: f64, k: f64, p: usize, e: &HnaError) -> ErrorRow {
    ErrorRow {
        alpha,
        k,
        p,
        n: 0,
        l2_abs: f64::NAN,
        l2_rel: f64::NAN,
        l1_rel: f64::NAN,
        cond: f64::NAN,
        dof_per_wavelength: f64::NAN,
        wall_seconds: 0.0,
        mu: None,
        status: format!("error: {e}"),
    }
}

/// Solves the reference degree and every candidate degree for each `(alpha, k)`
/// and writes `errors.csv`. Failed runs become rows with a non-`ok` status.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<ErrorRow>> {
    cfg.validate()?;
    cfg.echo()?;
    let poly = cfg.polygon()?;
    let mut rows = Vec::new();
    let with_cond = SolveOptions {
        condition_number: true,
        ..Default::default()
    };
    for alpha in cfg.alpha_values()? {
        for &k in &cfg.ks {
            let reference = match solve_hna(&poly, alpha, k, cfg.reference_p, cfg, &SolveOptions::default()) {
                Ok(r) => r,
                Err(e) => {
                    rows.extend(cfg.ps.iter().map(|&p| failed_error_row(alpha, k, p, &e)));
                    continue;
                }
            };
            let rsol = reference.solution(&poly)?;
            for &p in cfg.ps.iter().filter(|&&p| p != cfg.reference_p) {
                let row = solve_hna(&poly, alpha, k, p, cfg, &with_cond).and_then(|run| {
                    let e = density_errors(&run.solution(&poly)?, &rsol, &cfg.quad(cfg.reference_p))?;
                    Ok(ErrorRow {
                        alpha: run.alpha,
                        k,
                        p,
                        n: run.n_dof(),
                        l2_abs: e.l2_abs,
                        l2_rel: e.l2_rel,
                        l1_rel: e.l1_rel,
                        cond: run.cond.unwrap_or(f64::NAN),
                        dof_per_wavelength: dof_per_wavelength(run.n_dof(), &poly, k),
                        wall_seconds: run.wall_seconds,
                        mu: None,
                        status: "ok".into(),
                    })
                });
                rows.push(row.unwrap_or_else(|e| failed_error_row(alpha, k, p, &e)));
            }
        }
    }
    fill_mu(&mut rows);
    write_errors_csv(&cfg.out.join("errors.csv"), &rows)?;
    Ok(rows)
}

/// Boundary, circle and far-field samples of one run.
pub struct RunFields {
    pub boundary: FieldSamples,
    pub circle: FieldSamples,
    pub far: FieldSamples,
}

pub fn compute_fields(poly: &PolygonModel, run: &HnaRun, cfg: &ExperimentConfig) -> Result<RunFields> {
    let sol = run.solution(poly)?;
    let boundary = boundary_density(&sol, cfg.boundary_points)?;
    let dq = DensityQuadrature::new(sol, cfg.quad(run.p))?;
    let circle = near_field(&dq, Circle::default_for(poly), &angle_grid(cfg.circle_points))?;
    let far = far_field(&dq, &angle_grid(cfg.farfield_points));
    Ok(RunFields { boundary, circle, far })
}

fn write_fields(dir: &Path, run: &HnaRun, f: &RunFields) -> Result<()> {
    let tag = label(run.alpha, run.k, run.p);
    write_boundary_csv(&dir.join(format!("boundary_{tag}.csv")), &f.boundary)?;
    write_angle_csv(&dir.join(format!("circle_{tag}.csv")), &f.circle)?;
    write_angle_csv(&dir.join(format!("farfield_{tag}.csv")), &f.far)
}

/// Writes boundary, circle and far-field CSVs for each `(alpha, k, p)` and the
/// reference degree, plus `field_errors.csv` against the reference.
pub fn run_fields(cfg: &ExperimentConfig) -> Result<Vec<FieldErrorRow>> {
    cfg.validate()?;
    cfg.echo()?;
    let poly = cfg.polygon()?;
    let mut rows = Vec::new();
    for alpha in cfg.alpha_values()? {
        for &k in &cfg.ks {
            let reference = solve_hna(&poly, alpha, k, cfg.reference_p, cfg, &SolveOptions::default())
                .and_then(|run| compute_fields(&poly, &run, cfg).map(|f| (run, f)));
            let (rrun, rf) = match reference {
                Ok(x) => x,
                Err(e) => {
                    for &p in &cfg.ps {
                        rows.push(FieldErrorRow {
                            alpha,
                            k,
                            p,
                            n: 0,
                            circle_rel_max_error: f64::NAN,
                            farfield_abs_max_error: f64::NAN,
                            status: format!("error: {e}"),
                        });
                    }
                    continue;
                }
            };
            write_fields(&cfg.out, &rrun, &rf)?;
            for &p in cfg.ps.iter().filter(|&&p| p != cfg.reference_p) {
                let row = solve_hna(&poly, alpha, k, p, cfg, &SolveOptions::default()).and_then(|run| {
                    let f = compute_fields(&poly, &run, cfg)?;
                    write_fields(&cfg.out, &run, &f)?;
                    Ok(FieldErrorRow {
                        alpha: run.alpha,
                        k,
                        p,
                        n: run.n_dof(),
                        circle_rel_max_error: f.circle.max_abs_difference(&rf.circle)? / rf.circle.max_abs(),
                        farfield_abs_max_error: f.far.max_abs_difference(&rf.far)?,
                        status: "ok".into(),
                    })
                });
                rows.push(row.unwrap_or_else(|e| FieldErrorRow {
                    alpha,
                    k,
                    p,
                    n: 0,
                    circle_rel_max_error: f64::NAN,
                    farfield_abs_max_error: f64::NAN,
                    status: format!("error: {e}"),
                }));
            }
        }
    }
    write_rows(&cfg.out.join("field_errors.csv"), &rows)?;
    Ok(rows)
}

/// `Psi` along the boundary.
pub fn psi_rows(poly: &PolygonModel, leading: &[LeadingOrderTerm], n: usize) -> Result<Vec<PsiRow>> {
    Ok(leading_samples(poly, leading, n)?
        .into_iter()
        .map(|(side, s, v)| PsiRow {
            side,
            s,
            re: v.re,
            im: v.im,
            abs: v.norm(),
        })
        .collect())
}

pub fn write_psi_csv(path: &Path, rows: &[PsiRow]) -> Result<()> {
    write_rows(path, rows)
}

/// Per-block basis inventory.
pub fn space_rows(poly: &PolygonModel, space: &HnaSpace) -> Vec<SpaceRow> {
    space
        .blocks
        .iter()
        .map(|b| {
            let (lo, hi) = b.support();
            SpaceRow {
                side: b.side_index,
                side_kind: poly.sides[b.side_index].kind.to_string(),
                phase: b.phase.label().into(),
                s_lo: lo,
                s_hi: hi,
                degree: b.ndeg - 1,
                first_dof: b.first_dof,
            }
        })
        .collect()
}

/// Reference BEM solve with far field and boundary density outputs.
pub fn run_reference(
    cfg: &ExperimentConfig,
    alpha: f64,
    k: f64,
    rcfg: &ReferenceConfig,
) -> Result<(ReferenceSolution, FieldSamples, FieldSamples)> {
    let poly = cfg.polygon()?;
    let wave = IncidentWave::new(k, alpha)?;
    let op = cfg.operator_config(&poly)?;
    let r = solve_reference(&poly, wave, op, rcfg)?;
    let sol = r.solution(&poly, wave)?;
    let boundary = boundary_density(&sol, cfg.boundary_points)?;
    let far = far_field(&DensityQuadrature::new(sol, rcfg.quad)?, &angle_grid(cfg.farfield_points));
    let tag = format!("a{:.4}_k{}_ppw{}", wave.alpha, k, rcfg.ppw_dof);
    std::fs::create_dir_all(&cfg.out)?;
    write_boundary_csv(&cfg.out.join(format!("reference_boundary_{tag}.csv")), &boundary)?;
    write_angle_csv(&cfg.out.join(format!("reference_farfield_{tag}.csv")), &far)?;
    Ok((r, boundary, far))
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecfunRow {
    pub function: String,
    pub x: f64,
    pub computed_re: f64,
    pub computed_im: f64,
    pub oracle_re: f64,
    pub oracle_im: f64,
    pub ulp_error: f64,
}

fn ulp_error(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / (want.norm() * f64::EPSILON)
}

/// Golden values of `H0`, `H1` against the ascending series and `Fr` against the
/// contour integral.
pub fn specfun_table() -> Vec<SpecfunRow> {
    let mut rows = Vec::new();
    for &x in &[0.01, 0.1, 0.5, 1.0, 2.0, 3.5, 5.0, 7.0] {
        let b = bessel_01(x);
        let (j0, y0, j1, y1) = oracle::bessel_series(x);
        for (name, got, want) in [
            ("H0", b.h0(), Complex64::new(j0, y0)),
            ("H1", b.h1(), Complex64::new(j1, y1)),
        ] {
            rows.push(SpecfunRow {
                function: name.into(),
                x,
                computed_re: got.re,
                computed_im: got.im,
                oracle_re: want.re,
                oracle_im: want.im,
                ulp_error: ulp_error(got, want),
            });
        }
    }
    for &mu in &[0.0, 0.5, 1.3, 2.4, 2.6, 4.5, 9.0] {
        let got = fresnel_fr(mu);
        let want = oracle::fresnel_contour(mu);
        rows.push(SpecfunRow {
            function: "Fr".into(),
            x: mu,
            computed_re: got.re,
            computed_im: got.im,
            oracle_re: want.re,
            oracle_im: want.im,
            ulp_error: ulp_error(got, want),
        });
    }
    rows
}

/// CSV with a header row to any writer.
pub fn write_csv_to<W: std::io::Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
