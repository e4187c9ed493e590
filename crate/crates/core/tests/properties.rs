use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use hna::asymptotics::knife_edge_field;
use hna::galerkin_solver::{condition_number, relative_residual, solve_dense};
use hna::geometry::{make_test_polygon, IncidentWave};
use hna::harness::config::parse_angle;
use hna::postprocess::observation_direction;
use hna::quadrature::gauss_legendre;
use hna::specfun::{bessel_01, fresnel_fr};

fn matrix(n: usize, seed: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |i, j| {
        let a = seed[(i * n + j) % seed.len()];
        let b = seed[(i * n + j + 7) % seed.len()];
        let d = if i == j { n as f64 } else { 0.0 };
        Complex64::new(a + d, b)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fresnel_reflection(mu in -10.0f64..10.0) {
        prop_assert!((fresnel_fr(mu) + fresnel_fr(-mu) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn wronskian(x in 0.05f64..200.0) {
        let b = bessel_01(x);
        let want = -2.0 / (PI * x);
        prop_assert!(((b.j0 * b.y1 - b.j1 * b.y0 - want) / want).abs() < 1e-10);
    }

    #[test]
    fn knife_edge_vanishes_on_faces(r in 0.01f64..50.0, a in 0.01f64..(2.0 * PI - 0.01), k in 0.5f64..40.0) {
        prop_assert!(knife_edge_field(r, 0.0, a, k).unwrap().norm() < 1e-12);
        prop_assert!(knife_edge_field(r, 2.0 * PI, a, k).unwrap().norm() < 1e-12);
    }

    #[test]
    fn angle_text(num in -12i32..12, den in 1i32..9) {
        let v = parse_angle(&format!("{num}pi/{den}")).unwrap();
        prop_assert!((v - num as f64 * PI / den as f64).abs() < 1e-14);
    }

    #[test]
    fn gauss_exactness(m in 1usize..24, c in prop::collection::vec(-1.0f64..1.0, 48), a in -3.0f64..0.0, len in 0.1f64..4.0) {
        let b = a + len;
        let deg = 2 * m - 1;
        let rule = gauss_legendre(m, a, b).unwrap();
        let got: f64 = rule.integrate(|x| (0..=deg).map(|j| c[j] * x.powi(j as i32)).sum::<f64>());
        let want: f64 = (0..=deg).map(|j| c[j] * (b.powi(j as i32 + 1) - a.powi(j as i32 + 1)) / (j + 1) as f64).sum();
        let scale: f64 = (0..=deg).map(|j| c[j].abs() * 3f64.max(b.abs()).powi(j as i32 + 1)).sum();
        prop_assert!((got - want).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn arc_roundtrip(t in 0.0f64..1.0) {
        let poly = make_test_polygon();
        let arc = t * poly.perimeter;
        let (side, s) = poly.locate_arc(arc).unwrap();
        prop_assert!((poly.sides[side].global_arc(s) - arc).abs() < 1e-12 * poly.perimeter);
    }

    #[test]
    fn observation_directions_are_unit(t in 0.0f64..(2.0 * PI), alpha in 0.0f64..(2.0 * PI)) {
        let wave = IncidentWave::new(3.0, alpha).unwrap();
        prop_assert!((observation_direction(&wave, t).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cond_scale_invariant(n in 2usize..8, seed in prop::collection::vec(-1.0f64..1.0, 16), scale in 1e-6f64..1e6) {
        let a = matrix(n, &seed);
        let c0 = condition_number(&a);
        let c1 = condition_number(&(a * Complex64::new(scale, 0.0)));
        prop_assert!((c0 - c1).abs() <= 1e-9 * c0);
    }

    #[test]
    fn dense_solve_residual(n in 1usize..12, seed in prop::collection::vec(-1.0f64..1.0, 16)) {
        let a = matrix(n, &seed);
        let b = DVector::from_fn(n, |i, _| Complex64::new(seed[i % 16], 1.0));
        let x = solve_dense(&a, &b).unwrap();
        prop_assert!(relative_residual(&a, &x, &b) < 1e-12);
    }
}
