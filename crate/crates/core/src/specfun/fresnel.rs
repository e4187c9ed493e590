//! Fresnel integral `Fr(mu) = e^{-i pi/4}/sqrt(pi) * int_mu^inf e^{i z^2} dz` and the
//! half-plane diffraction building block `E(r, psi)`.
//!
//! For `mu >= 0` we use `Fr(mu) = 1/2 e^{i mu^2} w(e^{i pi/4} mu)` with `w` the
//! Faddeeva function, evaluated by its Laplace continued fraction (large `mu`) or
//! by the power series of `int_0^mu e^{i z^2} dz` (small `mu`). Negative arguments
//! use the reflection `Fr(mu) + Fr(-mu) = 1`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{HnaError, Result};

const SERIES_LIMIT: f64 = 2.5;
const ASYMPTOTIC_LIMIT: f64 = 50.0;

fn e_minus_i_quarter_pi() -> Complex64 {
    Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)
}

/// Fresnel integral `Fr(mu)` for finite real `mu`.
pub fn fresnel_fr(mu: f64) -> Complex64 {
    if mu < 0.0 {
        return Complex64::new(1.0, 0.0) - fresnel_fr_nonneg(-mu);
    }
    fresnel_fr_nonneg(mu)
}

/// Derivative `Fr'(mu) = -(e^{-i pi/4}/sqrt(pi)) e^{i mu^2}`.
pub fn fresnel_fr_derivative(mu: f64) -> Complex64 {
    -e_minus_i_quarter_pi() / PI.sqrt() * Complex64::from_polar(1.0, mu * mu)
}

fn fresnel_fr_nonneg(mu: f64) -> Complex64 {
    debug_assert!(mu >= 0.0);
    if mu < SERIES_LIMIT {
        // int_0^mu e^{i z^2} dz = sum_n i^n mu^{2n+1} / (n! (2n+1))
        let mu2 = mu * mu;
        let mut term = Complex64::new(mu, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut n = 0usize;
        loop {
            let contrib = term / (2 * n + 1) as f64;
            sum += contrib;
            if contrib.norm() < 1e-18 * sum.norm().max(1e-300) || n > 200 {
                break;
            }
            n += 1;
            term *= Complex64::new(0.0, mu2 / n as f64);
        }
        Complex64::new(0.5, 0.0) - e_minus_i_quarter_pi() / PI.sqrt() * sum
    } else {
        let z = Complex64::new(mu * FRAC_1_SQRT_2, mu * FRAC_1_SQRT_2);
        let w = if mu > ASYMPTOTIC_LIMIT {
            faddeeva_asymptotic(z)
        } else {
            faddeeva_continued_fraction(z)
        };
        0.5 * Complex64::from_polar(1.0, mu * mu) * w
    }
}

/// Laplace continued fraction for the Faddeeva function, valid for `Im z > 0`:
/// `w(z) = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...))))`.
fn faddeeva_continued_fraction(z: Complex64) -> Complex64 {
    // Modified Lentz evaluation of b0 + a1/(b1 + a2/(b2 + ...)), b_n = z, a_n = -n/2.
    let tiny = Complex64::new(1e-300, 0.0);
    let mut f = z;
    if f.norm() == 0.0 {
        f = tiny;
    }
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for n in 1..20_000 {
        let a = -(n as f64) / 2.0;
        d = z + a * d;
        if d.norm() == 0.0 {
            d = tiny;
        }
        c = z + a / c;
        if c.norm() == 0.0 {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    Complex64::new(0.0, 1.0 / PI.sqrt()) / f
}

/// Asymptotic series `w(z) ~ (i/(sqrt(pi) z)) sum_n (2n-1)!! / (2 z^2)^n` for large `|z|`.
fn faddeeva_asymptotic(z: Complex64) -> Complex64 {
    let inv2z2 = (2.0 * z * z).inv();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for n in 1..30 {
        term *= inv2z2 * (2 * n - 1) as f64;
        sum += term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    Complex64::new(0.0, 1.0 / PI.sqrt()) * sum / z
}

/// `E(r, psi) = e^{-i k r cos psi} Fr(-sqrt(2kr) cos(psi/2))`.
pub fn half_plane_e(r: f64, psi: f64, k: f64) -> Result<Complex64> {
    if !(r > 0.0) || !(k > 0.0) {
        return Err(HnaError::Domain(format!(
            "half_plane_E requires r > 0 and k > 0, got r = {r}, k = {k}"
        )));
    }
    Ok(half_plane_e_unchecked(r, psi, k))
}

pub(crate) fn half_plane_e_unchecked(r: f64, psi: f64, k: f64) -> Complex64 {
    let mu = -(2.0 * k * r).sqrt() * (psi / 2.0).cos();
    Complex64::from_polar(1.0, -k * r * psi.cos()) * fresnel_fr(mu)
}

/// Partial derivatives `(dE/dr, dE/dpsi)` in closed form.
///
/// The Fresnel derivative combines with the plane-wave factor into `e^{ikr}`
/// because `mu^2 = kr (1 + cos psi)`.
pub(crate) fn half_plane_e_gradient(r: f64, psi: f64, k: f64) -> (Complex64, Complex64) {
    let e = half_plane_e_unchecked(r, psi, k);
    let c = e_minus_i_quarter_pi() / PI.sqrt() * Complex64::from_polar(1.0, k * r);
    let mu = -(2.0 * k * r).sqrt() * (psi / 2.0).cos();
    let i = Complex64::new(0.0, 1.0);
    let d_r = -i * k * psi.cos() * e - c * (mu / (2.0 * r));
    let d_psi = i * k * r * psi.sin() * e - c * ((2.0 * k * r).sqrt() * (psi / 2.0).sin() / 2.0);
    (d_r, d_psi)
}
