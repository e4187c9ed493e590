//! Leading-order high-frequency behaviour of `du/dn`: geometrical optics on convex
//! sides and the knife-edge canonical solution on nonconvex sides.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{HnaError, Result};
use crate::geometry::{local_frame, IncidentWave, LocalFrame, PolygonModel, SideDescriptor, SideKind, Vec2};
use crate::specfun::{half_plane_e, half_plane_e_gradient, half_plane_e_unchecked};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Illumination {
    Illuminated,
    Shadow,
}

/// Illuminated iff `d . n < 0`; grazing incidence counts as shadow.
pub fn classify_illumination(side: &SideDescriptor, wave: &IncidentWave) -> Result<Illumination> {
    if side.kind != SideKind::Convex {
        return Err(HnaError::Classification {
            side: side.index,
            detail: format!("illumination is defined for convex sides, found {}", side.kind),
        });
    }
    Ok(if wave.d.dot(side.unit_normal) < 0.0 {
        Illumination::Illuminated
    } else {
        Illumination::Shadow
    })
}

/// Total field `u^d(r, theta, alpha)` for a plane wave arriving from `theta = alpha`
/// on the Dirichlet half-line `theta = 0`.
pub fn knife_edge_field(r: f64, theta: f64, alpha_loc: f64, k: f64) -> Result<Complex64> {
    Ok(half_plane_e(r, theta - alpha_loc, k)? - half_plane_e(r, theta + alpha_loc, k)?)
}

/// Polar coordinates about `R` of the point at arc length `s` on the side: the point
/// is `(-s, -L')` locally, which sits on the `theta -> 2 pi` face of the knife edge.
fn side_polar(s: f64, l_prime: f64) -> (f64, f64) {
    let r = s.hypot(l_prime);
    let theta = 2.0 * PI - (s / l_prime).atan();
    (r, theta)
}

/// `du^d/dx2` in local Cartesian coordinates at polar point `(r, theta)`.
fn knife_edge_dx2(r: f64, theta: f64, alpha_loc: f64, k: f64) -> Complex64 {
    let (dr_m, dpsi_m) = half_plane_e_gradient(r, theta - alpha_loc, k);
    let (dr_p, dpsi_p) = half_plane_e_gradient(r, theta + alpha_loc, k);
    let du_dr = dr_m - dr_p;
    let du_dtheta = dpsi_m - dpsi_p;
    // x1 = r sin(theta), x2 = -r cos(theta): dr/dx2 = -cos(theta), dtheta/dx2 = sin(theta)/r.
    let (st, ct) = theta.sin_cos();
    -du_dr * ct + du_dtheta * (st / r)
}

/// `du^d/dn` at arc length `s` on the nonconvex side of `frame`, for a unit-amplitude
/// plane wave referred to the local origin `R`.
pub fn knife_edge_normal_derivative(s: f64, frame: &LocalFrame, wave: &IncidentWave) -> Result<Complex64> {
    let tol = 1e-12 * frame.l_nc;
    if !(s >= -tol && s <= frame.l_nc + tol) {
        return Err(HnaError::Domain(format!(
            "arc parameter {s} outside [0, {}]",
            frame.l_nc
        )));
    }
    Ok(knife_edge_dn(s, frame.l_nc_prime, frame.local_alpha(wave), wave.k))
}

fn knife_edge_dn(s: f64, l_prime: f64, alpha_loc: f64, k: f64) -> Complex64 {
    let (r, theta) = side_polar(s, l_prime);
    // The exterior normal on the side is +x2 in the local frame.
    knife_edge_dx2(r, theta, alpha_loc, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeadingKind {
    Zero,
    ConvexGeometricalOptics,
    NonconvexKnifeEdge,
}

#[derive(Debug, Clone)]
enum Evaluator {
    Zero,
    Optics {
        origin: Vec2,
        tangent: Vec2,
        d: Vec2,
        d_dot_n: f64,
        k: f64,
    },
    KnifeEdge {
        amplitude: Complex64,
        l_prime: f64,
        alpha_loc: f64,
        k: f64,
    },
}

/// The known term `Psi` subtracted from `du/dn` on one side.
#[derive(Debug, Clone)]
pub struct LeadingOrderTerm {
    pub side_index: usize,
    pub kind: LeadingKind,
    pub length: f64,
    eval: Evaluator,
}

impl LeadingOrderTerm {
    /// `Psi = 0` on a side, used when solving for `du/dn` directly.
    pub fn zero(side_index: usize, length: f64) -> Self {
        LeadingOrderTerm {
            side_index,
            kind: LeadingKind::Zero,
            length,
            eval: Evaluator::Zero,
        }
    }

    /// `Psi(x(s))` at arc length `s` from the side's parameter origin.
    #[inline]
    pub fn evaluate(&self, s: f64) -> Complex64 {
        match &self.eval {
            Evaluator::Zero => Complex64::new(0.0, 0.0),
            Evaluator::Optics {
                origin,
                tangent,
                d,
                d_dot_n,
                k,
            } => {
                let x = *origin + *tangent * s;
                Complex64::new(0.0, 2.0 * k * d_dot_n) * Complex64::from_polar(1.0, k * x.dot(*d))
            }
            Evaluator::KnifeEdge {
                amplitude,
                l_prime,
                alpha_loc,
                k,
            } => 2.0 * amplitude * knife_edge_dn(s, *l_prime, *alpha_loc, *k),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.kind == LeadingKind::Zero
    }
}

/// Builds `Psi` on side `side_index`.
pub fn leading_order(poly: &PolygonModel, side_index: usize, wave: &IncidentWave) -> Result<LeadingOrderTerm> {
    let side = poly
        .sides
        .get(side_index)
        .ok_or_else(|| HnaError::Domain(format!("no side {side_index}")))?;
    let zero = LeadingOrderTerm {
        side_index,
        kind: LeadingKind::Zero,
        length: side.length,
        eval: Evaluator::Zero,
    };
    match side.kind {
        SideKind::Convex => match classify_illumination(side, wave)? {
            Illumination::Shadow => Ok(zero),
            Illumination::Illuminated => Ok(LeadingOrderTerm {
                side_index,
                kind: LeadingKind::ConvexGeometricalOptics,
                length: side.length,
                eval: Evaluator::Optics {
                    origin: side.origin(),
                    tangent: side.param_tangent(),
                    d: wave.d,
                    d_dot_n: wave.d.dot(side.unit_normal),
                    k: wave.k,
                },
            }),
        },
        SideKind::Nonconvex => {
            let frame = local_frame(poly, side_index)?;
            let alpha_loc = frame.local_alpha(wave);
            if !(FRAC_PI_2..=3.0 * FRAC_PI_2).contains(&alpha_loc) {
                return Ok(zero);
            }
            Ok(LeadingOrderTerm {
                side_index,
                kind: LeadingKind::NonconvexKnifeEdge,
                length: side.length,
                eval: Evaluator::KnifeEdge {
                    amplitude: wave.value(frame.r),
                    l_prime: frame.l_nc_prime,
                    alpha_loc,
                    k: wave.k,
                },
            })
        }
        SideKind::Irregular => Err(HnaError::Classification {
            side: side_index,
            detail: "side is neither convex nor nonconvex".into(),
        }),
    }
}

/// `Psi` on every side, in side order.
pub fn leading_order_all(poly: &PolygonModel, wave: &IncidentWave) -> Result<Vec<LeadingOrderTerm>> {
    (0..poly.sides.len()).map(|i| leading_order(poly, i, wave)).collect()
}

/// Knife-edge total field at a local Cartesian point, used by tests and diagnostics.
pub fn knife_edge_field_local(p: Vec2, alpha_loc: f64, k: f64) -> Result<Complex64> {
    let r = p.norm();
    if !(r > 0.0) {
        return Err(HnaError::Domain("knife-edge field at the edge tip".into()));
    }
    // Inverse of x1 = r sin(theta), x2 = -r cos(theta), theta in [0, 2 pi).
    let theta = p.x.atan2(-p.y).rem_euclid(2.0 * PI);
    Ok(half_plane_e_unchecked(r, theta - alpha_loc, k) - half_plane_e_unchecked(r, theta + alpha_loc, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_test_polygon;

    #[test]
    fn illumination_examples() {
        let poly = make_test_polygon();
        let w = IncidentWave::new(10.0, 5.0 * PI / 4.0).unwrap();
        assert_eq!(classify_illumination(&poly.sides[2], &w).unwrap(), Illumination::Shadow);
        assert_eq!(classify_illumination(&poly.sides[3], &w).unwrap(), Illumination::Shadow);
        assert!(classify_illumination(&poly.sides[0], &w).is_err());
        // Both nonconvex sides see the wave: d . n < 0 there.
        assert!(w.d.dot(poly.sides[0].unit_normal) < 0.0);
        assert!(w.d.dot(poly.sides[1].unit_normal) < 0.0);
        let w2 = IncidentWave::new(10.0, 5.0 * PI / 3.0).unwrap();
        assert_eq!(classify_illumination(&poly.sides[2], &w2).unwrap(), Illumination::Illuminated);
        assert_eq!(classify_illumination(&poly.sides[3], &w2).unwrap(), Illumination::Shadow);
    }

    #[test]
    fn grazing_is_shadow() {
        let sq = crate::geometry::make_square();
        // alpha = 0 gives d = (0, 1); the right side has n = (1, 0).
        let w = IncidentWave::new(1.0, 0.0).unwrap();
        let right = sq.sides.iter().find(|s| s.unit_normal.x > 0.5).unwrap();
        assert_eq!(classify_illumination(right, &w).unwrap(), Illumination::Shadow);
    }

    #[test]
    fn vanishes_on_faces() {
        for &r in &[0.1, 1.0, 3.7, 20.0] {
            for &a in &[0.6, PI / 2.0, 2.0, PI, 4.0] {
                let u0 = knife_edge_field(r, 0.0, a, 10.0).unwrap();
                let u2 = knife_edge_field(r, 2.0 * PI, a, 10.0).unwrap();
                assert!(u0.norm() < 1e-12 && u2.norm() < 1e-12, "r={r} a={a}");
            }
        }
        assert!(knife_edge_field(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn normal_derivative_matches_difference() {
        let poly = make_test_polygon();
        let w = IncidentWave::new(10.0, 5.0 * PI / 3.0).unwrap();
        let frame = local_frame(&poly, 0).unwrap();
        let a = frame.local_alpha(&w);
        let h = 1e-5 * w.wavelength();
        for i in 1..40 {
            let s = frame.l_nc * i as f64 / 40.0;
            let p = Vec2::new(-s, -frame.l_nc_prime);
            let up = knife_edge_field_local(p + Vec2::new(0.0, h), a, w.k).unwrap();
            let um = knife_edge_field_local(p - Vec2::new(0.0, h), a, w.k).unwrap();
            let fd = (up - um) / (2.0 * h);
            let an = knife_edge_normal_derivative(s, &frame, &w).unwrap();
            assert!((fd - an).norm() <= 1e-6 * an.norm().max(1.0), "s={s}: {fd} vs {an}");
        }
    }

    #[test]
    fn local_normal_is_positive_x2() {
        let poly = make_test_polygon();
        for i in 0..2 {
            let f = local_frame(&poly, i).unwrap();
            let n = f.dir_to_local(poly.sides[i].unit_normal);
            assert!((n - Vec2::new(0.0, 1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn psi_examples() {
        let poly = make_test_polygon();
        let w = IncidentWave::new(10.0, 5.0 * PI / 4.0).unwrap();
        let all = leading_order_all(&poly, &w).unwrap();
        assert!(all[2].is_zero() && all[3].is_zero());
        assert_eq!(all[0].kind, LeadingKind::NonconvexKnifeEdge);
        assert_eq!(all[1].kind, LeadingKind::NonconvexKnifeEdge);
        // alpha = 5 pi/3: horizontal side has alpha_loc = 5 pi/3, outside [pi/2, 3 pi/2].
        let w2 = IncidentWave::new(10.0, 5.0 * PI / 3.0).unwrap();
        let all2 = leading_order_all(&poly, &w2).unwrap();
        assert!(all2[1].is_zero());
        assert_eq!(all2[0].kind, LeadingKind::NonconvexKnifeEdge);
        let frame = local_frame(&poly, 0).unwrap();
        let s = 0.5 * frame.l_nc;
        let want = 2.0 * w2.value(frame.r) * knife_edge_normal_derivative(s, &frame, &w2).unwrap();
        assert!((all2[0].evaluate(s) - want).norm() < 1e-14 * want.norm());
        // Illuminated convex side has modulus 2k|d.n|.
        assert_eq!(all2[2].kind, LeadingKind::ConvexGeometricalOptics);
        let dn = w2.d.dot(poly.sides[2].unit_normal).abs();
        for i in 0..10 {
            let v = all2[2].evaluate(poly.sides[2].length * i as f64 / 9.0);
            assert!((v.norm() - 20.0 * dn).abs() < 1e-12);
        }
    }

    #[test]
    fn head_on_convex_value() {
        // Side with n = (0, 1) through the origin, d = (0, -1): Psi(0) = 2ik(d.n) = -20i.
        let poly = PolygonModel::new(vec![
            Vec2::new(1.0, 0.0),
            Vec2::new(-1.0, 0.0),
            Vec2::new(0.0, -1.0),
        ])
        .unwrap();
        let top = poly.sides.iter().position(|s| s.unit_normal.y > 0.99).unwrap();
        let w = IncidentWave::new(10.0, PI).unwrap();
        let psi = leading_order(&poly, top, &w).unwrap();
        let side = &poly.sides[top];
        let s0 = (Vec2::default() - side.origin()).dot(side.param_tangent());
        assert!((psi.evaluate(s0) - Complex64::new(0.0, -20.0)).norm() < 1e-12);
    }

    #[test]
    fn symmetric_incidence_is_mirror_symmetric() {
        // Incidence along the edge's extension: the field is even about the edge line.
        for &r in &[0.5, 2.0, 7.0] {
            for &t in &[0.3, 1.0, 2.5] {
                let a = knife_edge_field(r, t, PI, 4.0).unwrap();
                let b = knife_edge_field(r, 2.0 * PI - t, PI, 4.0).unwrap();
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn helmholtz_residual() {
        let k = 5.0;
        let h = 1e-3 * 2.0 * PI / k;
        for &(x, y) in &[(-1.0, 0.7), (-2.0, -3.0), (1.5, 2.0), (0.4, -0.3)] {
            let p = Vec2::new(x, y);
            let f = |q: Vec2| knife_edge_field_local(q, 2.2, k).unwrap();
            let lap = (f(p + Vec2::new(h, 0.0)) + f(p - Vec2::new(h, 0.0)) + f(p + Vec2::new(0.0, h))
                + f(p - Vec2::new(0.0, h))
                - 4.0 * f(p))
                / (h * h);
            let res = (lap + k * k * f(p)).norm();
            assert!(res <= 1e-4 * k * k * f(p).norm(), "at {p}: {res}");
        }
    }
}
