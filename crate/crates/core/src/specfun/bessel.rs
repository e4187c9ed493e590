//! Bessel and Hankel functions of orders 0, 1, 2 for positive real argument.
//!
//! For `x <= MILLER_LIMIT` the J values come from Miller's backward recurrence
//! normalised by `J0 + 2 sum J_2k = 1`, and the Y values from the Neumann
//! series in the even/odd J's. Every term in those sums is bounded by one, so
//! there is no catastrophic cancellation anywhere in the range. Above the limit
//! the Hankel asymptotic expansion is summed to its smallest term, which is
//! below `exp(-2x)` and hence negligible.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{HnaError, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MILLER_LIMIT: f64 = 25.0;

/// Values of J0, J1, Y0, Y1 at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselPair {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl BesselPair {
    pub fn h0(&self) -> Complex64 {
        Complex64::new(self.j0, self.y0)
    }

    pub fn h1(&self) -> Complex64 {
        Complex64::new(self.j1, self.y1)
    }
}

/// J0, J1, Y0, Y1 at `x > 0`. The caller guarantees positivity.
pub fn bessel_01(x: f64) -> BesselPair {
    debug_assert!(x > 0.0);
    if x <= MILLER_LIMIT {
        miller_neumann(x)
    } else {
        let (h0, h1) = hankel_asymptotic(x);
        BesselPair {
            j0: h0.re,
            j1: h1.re,
            y0: h0.im,
            y1: h1.im,
        }
    }
}

/// H0 and H1 of the first kind at `x > 0`, the pair needed by the layer kernels.
#[inline]
pub fn hankel1_01(x: f64) -> (Complex64, Complex64) {
    let b = bessel_01(x);
    (b.h0(), b.h1())
}

/// Hankel function of the first kind `H_order(x)` for `order` in {0, 1, 2}.
pub fn hankel1(order: u32, x: f64) -> Result<Complex64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(HnaError::Domain(format!(
            "hankel1 requires a finite positive argument, got {x}"
        )));
    }
    let (h0, h1) = hankel1_01(x);
    match order {
        0 => Ok(h0),
        1 => Ok(h1),
        2 => Ok(h1 * (2.0 / x) - h0),
        _ => Err(HnaError::Domain(format!(
            "hankel1 supports orders 0..=2, got {order}"
        ))),
    }
}

fn miller_neumann(x: f64) -> BesselPair {
    // Start index well above x so the recurrence has settled on the minimal solution.
    let start = {
        let n = (x + 30.0 + 6.0 * x.sqrt()).ceil() as usize;
        n + (n % 2)
    };
    // start <= 86 for x <= MILLER_LIMIT; a stack buffer keeps the kernel loop allocation-free.
    let mut j = [0.0_f64; 96];
    j[start] = 1e-300;
    for n in (1..=start).rev() {
        let next = (2.0 * n as f64 / x) * j[n] - j[n + 1];
        j[n - 1] = next;
        if next.abs() > 1e250 {
            let scale = 1e-250;
            for v in j[n - 1..=start + 1].iter_mut() {
                *v *= scale;
            }
        }
    }
    let mut norm = j[0];
    for k in (2..=start).step_by(2) {
        norm += 2.0 * j[k];
    }
    for v in j[..=start].iter_mut() {
        *v /= norm;
    }

    let log_term = (x / 2.0).ln() + EULER_GAMMA;

    // (pi/2) Y0 = (ln(x/2) + g) J0 - 2 sum_{k>=1} (-1)^k J_{2k} / k
    let mut s0 = 0.0;
    // (pi/2) Y1 = (ln(x/2) + g - 1) J1 - J0/x - sum_{k>=1} (-1)^k (2k+1)/(k(k+1)) J_{2k+1}
    let mut s1 = 0.0;
    let mut k = 1usize;
    while 2 * k + 1 <= start {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (2.0 * kf + 1.0) / (kf * (kf + 1.0)) * j[2 * k + 1];
        k += 1;
    }
    let y0 = (log_term * j[0] - 2.0 * s0) / FRAC_PI_2;
    let y1 = ((log_term - 1.0) * j[1] - j[0] / x - s1) / FRAC_PI_2;
    BesselPair {
        j0: j[0],
        j1: j[1],
        y0,
        y1,
    }
}

/// Hankel asymptotic expansion for orders 0 and 1, summed until the terms
/// stop decreasing or fall below the working precision.
fn hankel_asymptotic(x: f64) -> (Complex64, Complex64) {
    let amp = (2.0 / (PI * x)).sqrt();
    let h = |nu: f64| -> Complex64 {
        let mu = 4.0 * nu * nu;
        let mut p = 1.0;
        let mut q = 0.0;
        let mut term = 1.0_f64;
        let mut last = f64::INFINITY;
        let mut kk = 1usize;
        loop {
            let odd = (2 * kk - 1) as f64;
            term *= (mu - odd * odd) / (kk as f64 * 8.0 * x);
            let mag = term.abs();
            if mag >= last || kk > 200 {
                break;
            }
            // a_k enters with sign (-1)^{floor(k/2)} and alternates between Q and P.
            match kk % 4 {
                1 => q += term,
                2 => p -= term,
                3 => q -= term,
                _ => p += term,
            }
            if mag < 1e-17 {
                break;
            }
            last = mag;
            kk += 1;
        }
        let chi = x - (nu / 2.0 + 0.25) * PI;
        Complex64::new(p, q) * Complex64::from_polar(amp, chi)
    };
    (h(0.0), h(1.0))
}
