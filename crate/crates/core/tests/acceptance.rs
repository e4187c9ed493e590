//! Release acceptance criteria. Each test prints one `PASS` or `FAIL` line to stderr
//! (uncaptured) and then asserts.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use hna::asymptotics::{knife_edge_field, knife_edge_field_local, knife_edge_normal_derivative};
use hna::geometry::{local_frame, make_test_polygon, validate_class_c, IncidentWave, Vec2};
use hna::harness::config::ExperimentConfig;
use hna::harness::validation::{coercivity_ratios, oracle_discrepancy, quadrature_checks, specfun_checks};
use hna::harness::{compute_fields, quad_selfcheck, solve_hna, HnaRun, SolveOptions};
use hna::hna_space::{build_space, SpaceParams};
use hna::postprocess::{angle_grid, density_errors, observation_direction, DensityQuadrature};

const ALPHAS: [f64; 2] = [1.25 * PI, 5.0 * PI / 3.0];

fn report(name: &str, passed: bool, detail: &str) -> bool {
    let tag = if passed { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "\n{tag} {name}: {detail}");
    passed
}

fn config() -> ExperimentConfig {
    ExperimentConfig {
        circle_points: 1000,
        farfield_points: 1000,
        ..Default::default()
    }
}

#[test]
fn special_functions() {
    let checks = specfun_checks(7);
    let detail = checks
        .iter()
        .map(|c| format!("{} {:.1e}", c.name, c.value))
        .collect::<Vec<_>>()
        .join(", ");
    assert!(report("special functions", checks.iter().all(|c| c.passed), &detail));
}

#[test]
fn canonical_solution() {
    let mut faces = 0.0f64;
    for &r in &[0.05, 0.7, 3.0, 12.0, 40.0] {
        for &a in &[0.4, 1.3, PI / 2.0, 2.5, PI, 4.4] {
            for k in [1.0, 10.0] {
                faces = faces.max(knife_edge_field(r, 0.0, a, k).unwrap().norm());
                faces = faces.max(knife_edge_field(r, 2.0 * PI, a, k).unwrap().norm());
            }
        }
    }

    let poly = make_test_polygon();
    let wave = IncidentWave::new(10.0, 1.25 * PI).unwrap();
    let h = 1e-5 * wave.wavelength();
    let mut fd_err = 0.0f64;
    let mut samples = 0;
    for side in 0..2 {
        let frame = local_frame(&poly, side).unwrap();
        let a = frame.local_alpha(&wave);
        for i in 0..100 {
            let s = frame.l_nc * (i as f64 + 0.5) / 100.0;
            let p = Vec2::new(-s, -frame.l_nc_prime);
            let up = knife_edge_field_local(p + Vec2::new(0.0, h), a, wave.k).unwrap();
            let um = knife_edge_field_local(p - Vec2::new(0.0, h), a, wave.k).unwrap();
            let fd = (up - um) / (2.0 * h);
            let an = knife_edge_normal_derivative(s, &frame, &wave).unwrap();
            fd_err = fd_err.max((fd - an).norm() / an.norm());
            samples += 1;
        }
    }

    let k = 5.0;
    let hh = 1e-3 * 2.0 * PI / k;
    let mut helm = 0.0f64;
    for &(x, y) in &[(-1.0, 0.7), (-2.0, -3.0), (1.5, 2.0), (0.4, -0.3), (3.0, 0.2), (-0.2, 4.0)] {
        for &a in &[0.7, 2.2, 3.9] {
            let p = Vec2::new(x, y);
            let f = |q: Vec2| knife_edge_field_local(q, a, k).unwrap();
            let lap = (f(p + Vec2::new(hh, 0.0)) + f(p - Vec2::new(hh, 0.0)) + f(p + Vec2::new(0.0, hh))
                + f(p - Vec2::new(0.0, hh))
                - 4.0 * f(p))
                / (hh * hh);
            helm = helm.max((lap + k * k * f(p)).norm() / (k * k * f(p).norm()));
        }
    }

    let passed = faces <= 1e-12 && fd_err <= 1e-6 && samples == 200 && helm <= 1e-4;
    let detail = format!("faces {faces:.1e} (1e-12), dn vs FD {fd_err:.1e} on {samples} samples (1e-6), Helmholtz {helm:.1e} (1e-4)");
    assert!(report("canonical solution", passed, &detail));
}

#[test]
fn geometry() {
    let poly = make_test_polygon();
    let mut lengths: Vec<f64> = poly.sides.iter().map(|s| s.length).collect();
    lengths.sort_by(f64::total_cmp);
    let want = [2.0 * PI, 2.0 * PI, 4.0 * PI, 4.0 * PI];
    let len_err = lengths.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let delta = poly.delta_star().unwrap();
    let class_c = validate_class_c(&poly).pass;
    let wave = IncidentWave::new(10.0, 1.25 * PI).unwrap();
    let n320 = build_space(&poly, &wave, SpaceParams { n: 10, ..SpaceParams::new(4) }).unwrap().n_dof();
    let counts_ok = (0..=7).all(|p| build_space(&poly, &wave, SpaceParams::new(p)).unwrap().n_dof() == 12 * p * p + 28 * p + 16);
    let passed = len_err <= 1e-12 && (delta - 0.4350).abs() <= 1e-4 && class_c && n320 == 320 && counts_ok;
    let detail = format!("side lengths {len_err:.1e}, delta* {delta:.5}, class C {class_c}, N(p=4, n=10) = {n320}, N = 12p^2+28p+16 for p <= 7: {counts_ok}");
    assert!(report("geometry", passed, &detail));
}

#[test]
fn quadrature() {
    let checks = quadrature_checks();
    let poly = make_test_polygon();
    let drift = quad_selfcheck(&poly, 1.25 * PI, 10.0, 4, &config()).unwrap();
    let passed = checks.iter().all(|c| c.passed) && drift <= 1e-8;
    let mut detail: Vec<String> = checks.iter().map(|c| format!("{} {:.1e}", c.name, c.value)).collect();
    detail.push(format!("doubling drift at k = 10, p = 4: {drift:.2e} (1e-8)"));
    assert!(report("quadrature", passed, &detail.join(", ")));
}

#[test]
fn coercivity() {
    let ratios = coercivity_ratios(11, 50).unwrap();
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let passed = ratios.len() == 50 && min >= 0.5;
    assert!(report("coercivity", passed, &format!("min ratio over 50 samples {min:.3} (>= 0.5)")));
}

#[test]
fn oracle_equivalence() {
    let (hna, self_conv) = oracle_discrepancy(5.0, 1.25 * PI, 4, 20.0).unwrap();
    let passed = hna <= 0.05 && self_conv <= 0.01;
    let detail = format!("HNA p = 4 vs reference {:.2}% (5%), reference self-convergence {:.2}% (1%)", 100.0 * hna, 100.0 * self_conv);
    assert!(report("oracle equivalence", passed, &detail));
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

// Published p = 4 values: (alpha index, k, l2_rel, l1_rel, cond).
const TABLE: [(usize, f64, f64, f64, f64); 6] = [
    (0, 5.0, 0.390, 1.03e-2, 3.36e5),
    (0, 10.0, 0.404, 1.43e-2, 1.87e2),
    (0, 20.0, 0.424, 1.69e-2, 1.34e2),
    (1, 5.0, 0.405, 1.17e-2, 3.36e5),
    (1, 10.0, 0.418, 1.60e-2, 1.87e2),
    (1, 20.0, 0.427, 1.80e-2, 1.34e2),
];

/// Table reproduction and the convergence study share the degree-6 references at
/// `k = 10`, so both criteria are evaluated here.
#[test]
fn error_table_and_convergence() {
    let poly = make_test_polygon();
    let cfg = config();
    let cond = SolveOptions {
        condition_number: true,
        ..Default::default()
    };
    let mut table_ok = true;
    let mut table_detail = Vec::new();
    let mut refs: Vec<Option<HnaRun>> = vec![None, None];
    for (ai, &alpha) in ALPHAS.iter().enumerate() {
        let mut l2_abs = Vec::new();
        for &(_, k, l2_want, l1_want, cond_want) in TABLE.iter().filter(|r| r.0 == ai) {
            let reference = solve_hna(&poly, alpha, k, 6, &cfg, &SolveOptions::default()).unwrap();
            let run = solve_hna(&poly, alpha, k, 4, &cfg, &cond).unwrap();
            let e = density_errors(&run.solution(&poly).unwrap(), &reference.solution(&poly).unwrap(), &cfg.quad(6)).unwrap();
            let c = run.cond.unwrap();
            let l2_ok = e.l2_rel >= l2_want / 2.0 && e.l2_rel <= 2.0 * l2_want;
            let l1_ok = e.l1_rel >= l1_want / 3.0 && e.l1_rel <= 3.0 * l1_want;
            let cond_ok = k < 10.0 || (c >= cond_want / 3.0 && c <= 3.0 * cond_want);
            table_ok &= l2_ok && l1_ok && cond_ok;
            table_detail.push(format!(
                "[a{} k{k}: l2_rel {:.3} (expected {l2_want}), l1_rel {:.2e} (expected {l1_want:.2e}), cond {c:.2e} (expected {cond_want:.2e})]",
                ai, e.l2_rel, e.l1_rel
            ));
            l2_abs.push(e.l2_abs);
            if k == 10.0 {
                refs[ai] = Some(reference);
            }
        }
        let dec = strictly_decreasing(&l2_abs);
        table_ok &= dec;
        table_detail.push(format!("[a{ai}: l2_abs {l2_abs:.3?} decreasing in k: {dec}]"));
    }

    let mut conv_ok = true;
    let mut conv_detail = Vec::new();
    for (ai, &alpha) in ALPHAS.iter().enumerate() {
        let reference = refs[ai].take().unwrap();
        let rsol = reference.solution(&poly).unwrap();
        let rf = compute_fields(&poly, &reference, &cfg).unwrap();
        let (mut l2, mut circle, mut far) = (Vec::new(), Vec::new(), Vec::new());
        for p in 1..=5 {
            let run = solve_hna(&poly, alpha, 10.0, p, &cfg, &SolveOptions::default()).unwrap();
            let e = density_errors(&run.solution(&poly).unwrap(), &rsol, &cfg.quad(6)).unwrap();
            let f = compute_fields(&poly, &run, &cfg).unwrap();
            l2.push(e.l2_rel);
            circle.push(f.circle.max_abs_difference(&rf.circle).unwrap() / rf.circle.max_abs());
            far.push(f.far.max_abs_difference(&rf.far).unwrap());
        }
        let ps: Vec<f64> = (1..=5).map(|p| p as f64).collect();
        let logs: Vec<f64> = l2.iter().map(|e| e.ln()).collect();
        let m = slope(&ps, &logs);
        let ok = m <= -0.5 && strictly_decreasing(&circle) && strictly_decreasing(&far);
        conv_ok &= ok;
        conv_detail.push(format!(
            "[a{ai}: slope {m:.3} (<= -0.5), l2_rel {l2:.3?}, circle {}, far {}]",
            sci(&circle),
            sci(&far)
        ));
    }

    let t = report("table reproduction", table_ok, &table_detail.join(" "));
    let c = report("exponential convergence", conv_ok, &conv_detail.join(" "));
    assert!(t && c);
}

#[test]
fn far_near_consistency() {
    let poly = make_test_polygon();
    let cfg = config();
    let run = solve_hna(&poly, 1.25 * PI, 10.0, 4, &cfg, &SolveOptions::default()).unwrap();
    let dq = DensityQuadrature::new(run.solution(&poly).unwrap(), cfg.quad(4)).unwrap();
    let k = run.k;
    let grid = angle_grid(90);
    let discrepancy = |r: f64| -> f64 {
        let (mut diff, mut size) = (0.0f64, 0.0f64);
        for &t in &grid {
            let xhat = observation_direction(&run.wave, t);
            let us = dq.scattered(xhat * r).unwrap();
            let asym = Complex64::from_polar(1.0, PI / 4.0 + k * r) / (2.0 * (2.0 * PI).sqrt() * (k * r).sqrt())
                * dq.far_field_at(xhat);
            diff = diff.max((us - asym).norm());
            size = size.max(asym.norm());
        }
        diff / size
    };
    let near = discrepancy(50.0 * PI);
    let far = discrepancy(200.0 * PI);
    let ratio = near / far;
    let passed = (2.5..=6.0).contains(&ratio);
    let detail = format!("discrepancy {near:.2e} at r = 50 pi, {far:.2e} at r = 200 pi, ratio {ratio:.2} (2.5 to 6)");
    assert!(report("far/near consistency", passed, &detail));
}
