//! Slow independent evaluations used to check the production special functions.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Ascending series for `(J0, Y0, J1, Y1)`, accurate for `x` below about 8.
pub fn bessel_series(x: f64) -> (f64, f64, f64, f64) {
    let t = x / 2.0;
    let lg = t.ln() + EULER_GAMMA;
    let (mut j0, mut j1) = (0.0, 0.0);
    let (mut y0s, mut y1s) = (0.0, 0.0);
    let mut h = 0.0; // harmonic number H_m
    let mut fact = 1.0; // m!
    for m in 0..60 {
        let mf = m as f64;
        if m > 0 {
            fact *= mf;
            h += 1.0 / mf;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let a = sign * t.powi(2 * m as i32) / (fact * fact);
        j0 += a;
        y0s += a * h;
        let b = sign * t.powi(2 * m as i32 + 1) / (fact * fact * (mf + 1.0));
        j1 += b;
        y1s += b * (h + h + 1.0 / (mf + 1.0));
    }
    let y0 = (2.0 / PI) * (lg * j0 - y0s);
    // Y1 = (2/pi)(ln(x/2)+g) J1 - 2/(pi x) - (1/pi) sum (-1)^m (x/2)^{2m+1}/(m!(m+1)!) (H_m + H_{m+1})
    let y1 = (2.0 / PI) * lg * j1 - 2.0 / (PI * x) - y1s / PI;
    (j0, y0, j1, y1)
}

/// Adaptive Simpson on a complex integrand.
fn adaptive_simpson(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> Complex64,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth > 40 || delta.norm() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 0)
}

/// Defining integral along the rotated contour z = mu + t e^{i pi/4}; `mu >= 0`.
pub fn fresnel_contour(mu: f64) -> Complex64 {
    let rot = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
    let f = |t: f64| {
        let z = mu + t * rot;
        (Complex64::new(0.0, 1.0) * z * z).exp() * rot
    };
    let integral = adaptive_simpson(&f, 0.0, 12.0, 1e-14);
    Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2) / PI.sqrt() * integral
}
