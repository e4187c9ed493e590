//! Special functions: Hankel functions, the Fresnel integral, the half-plane
//! diffraction building block and the quarter-plane image Green's function.

mod bessel;
mod fresnel;
pub mod oracle;

pub use bessel::{bessel_01, hankel1, hankel1_01, BesselPair};
pub(crate) use fresnel::{half_plane_e_gradient, half_plane_e_unchecked};
pub use fresnel::{fresnel_fr, fresnel_fr_derivative, half_plane_e};

use num_complex::Complex64;

use crate::error::{HnaError, Result};
use crate::geometry::{LocalFrame, Vec2};

/// Dirichlet Green's function of the quarter plane `{x1 < 0, x2 > -L'}` in the local
/// frame of a nonconvex side, built from three images of the source.
///
/// `x` and `y` are global points.
pub fn quarter_plane_green(x: Vec2, y: Vec2, k: f64, frame: &LocalFrame) -> Result<Complex64> {
    if !(k > 0.0) {
        return Err(HnaError::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let xl = frame.to_local(x);
    let yl = frame.to_local(y);
    let lp = frame.l_nc_prime;
    let y_star = Vec2::new(yl.x, -2.0 * lp - yl.y);
    let y_prime = Vec2::new(-yl.x, yl.y);
    let y_star_prime = Vec2::new(-yl.x, -2.0 * lp - yl.y);
    let scale = frame.l_nc.max(lp);
    let mut g = Complex64::new(0.0, 0.0);
    for (img, sign) in [(yl, 1.0), (y_star, -1.0), (y_prime, -1.0), (y_star_prime, 1.0)] {
        let dist = (xl - img).norm();
        if dist <= 1e-14 * scale {
            return Err(HnaError::Singularity(
                "target coincides with the source or one of its images".into(),
            ));
        }
        g += sign * hankel1_01(k * dist).0;
    }
    Ok(Complex64::new(0.0, 0.25) * g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{local_frame, make_test_polygon};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frame() -> LocalFrame {
        local_frame(&make_test_polygon(), 0).unwrap()
    }

    #[test]
    fn vanishes_on_faces() {
        let f = frame();
        let lp = f.l_nc_prime;
        let xs = [Vec2::new(-1.0, 0.5), Vec2::new(-3.0, -2.0), Vec2::new(-0.2, 4.0)];
        let ys = [Vec2::new(0.0, 1.0), Vec2::new(0.0, -lp + 0.3), Vec2::new(-2.0, -lp), Vec2::new(-7.0, -lp)];
        for &xl in &xs {
            for &yl in &ys {
                let g = quarter_plane_green(f.to_global(xl), f.to_global(yl), 3.0, &f).unwrap();
                assert!(g.norm() < 1e-12, "x={xl} y={yl}: {g}");
            }
        }
    }

    #[test]
    fn reciprocity() {
        let f = frame();
        let lp = f.l_nc_prime;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let a = Vec2::new(-rng.random_range(0.01..8.0), -lp + rng.random_range(0.01..8.0));
            let b = Vec2::new(-rng.random_range(0.01..8.0), -lp + rng.random_range(0.01..8.0));
            let (xa, xb) = (f.to_global(a), f.to_global(b));
            let g1 = quarter_plane_green(xa, xb, 2.5, &f).unwrap();
            let g2 = quarter_plane_green(xb, xa, 2.5, &f).unwrap();
            assert!((g1 - g2).norm() <= 1e-13 * g1.norm().max(1.0));
        }
    }

    #[test]
    fn log_growth_near_source() {
        let f = frame();
        let y = f.to_global(Vec2::new(-1.0, -1.0));
        let small = quarter_plane_green(y + Vec2::new(1e-6, 0.0), y, 1.0, &f).unwrap();
        let smaller = quarter_plane_green(y + Vec2::new(1e-9, 0.0), y, 1.0, &f).unwrap();
        // Re part ~ -(1/2pi) log(delta): growth over three decades is 3 ln 10 / (2 pi).
        let growth = smaller.re - small.re;
        assert!((growth - 3.0 * 10f64.ln() / (2.0 * std::f64::consts::PI)).abs() < 1e-3);
        assert!(matches!(quarter_plane_green(y, y, 1.0, &f), Err(HnaError::Singularity(_))));
    }
}
