//! Closed-form reference values for the two worked examples.
//!
//! The binary example has a one-parameter optimal family indexed by
//! `p = P_X(0)`; the Gaussian example has explicit extreme points, some of
//! them one-dimensional Gaussian expectations evaluated here by adaptive
//! Simpson quadrature.

use crate::prob::binary_entropy;
use crate::{Csir, Error, Result};

/// A point of the binary example's parametric frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    /// `P_X(0)`.
    pub p: f64,
    pub capacity_bits: f64,
    pub distortion: f64,
}

/// Binary example at `P_X(0) = p`:
///
/// ```text
/// no CSIR:      C(p) = H₂(0.6 − 0.6p) − (1 − p) H₂(0.4)
/// perfect CSIR: C(p) = 0.6 H₂(p)
/// both:         D(p) = 0.2 (1 + p)
/// ```
pub fn binary_curve(p: f64, csir: Csir) -> Result<CurveSample> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange { what: "P_X(0)", value: p });
    }
    let capacity_bits = match csir {
        Csir::None => binary_entropy(0.6 - 0.6 * p)? - (1.0 - p) * binary_entropy(0.4)?,
        Csir::Perfect => 0.6 * binary_entropy(p)?,
    };
    Ok(CurveSample {
        p,
        capacity_bits,
        distortion: 0.2 * (1.0 + p),
    })
}

/// The capacity-maximizing sample of [`binary_curve`], by golden-section
/// search on the concave `C(p)`.
pub fn binary_curve_peak(csir: Csir) -> CurveSample {
    let c = |p: f64| binary_curve(p, csir).map(|s| s.capacity_bits).unwrap_or(f64::NEG_INFINITY);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    while b - a > 1e-12 {
        let m1 = b - inv_phi * (b - a);
        let m2 = a + inv_phi * (b - a);
        if c(m1) < c(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    binary_curve(0.5 * (a + b), csir).expect("p in [0, 1]")
}

fn check_alpha_power(alpha: f64, power: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::OutOfRange { what: "alpha", value: alpha });
    }
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::OutOfRange { what: "power", value: power });
    }
    Ok(())
}

/// `D_min = 1 + α² / (1 + α² P)`, reached by 2-ary PAM at `±√P`.
pub fn gaussian_dmin(alpha: f64, power: f64) -> Result<f64> {
    check_alpha_power(alpha, power)?;
    let a2 = alpha * alpha;
    Ok(1.0 + a2 / (1.0 + a2 * power))
}

/// `var[S_T] = 1 + α²`, the distortion of the constant estimate `ŝ = 0`.
pub fn var_st(alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::OutOfRange { what: "alpha", value: alpha });
    }
    Ok(1.0 + alpha * alpha)
}

/// Variance of the channel gain `S = S₁ + S₂`.
pub const GAIN_VARIANCE: f64 = 2.0;

/// `½ E[log₂(1 + S² P)]` with `S ~ N(0, 2)`.
pub fn gaussian_cmax_perfect_csir(power: f64) -> Result<f64> {
    check_alpha_power(0.0, power)?;
    let sigma = GAIN_VARIANCE.sqrt();
    Ok(0.5 * gaussian_expectation(sigma, |s| (s * s).mul_add(power, 1.0).log2(), 1e-10))
}

/// `1 + E[α² / (1 + α² X²)]` with `X ~ N(0, P)`: the distortion of the
/// optimal estimator when the input is Gaussian.
pub fn gaussian_distortion_at_gaussian_input(alpha: f64, power: f64) -> Result<f64> {
    check_alpha_power(alpha, power)?;
    let a2 = alpha * alpha;
    Ok(1.0 + gaussian_expectation(power.sqrt(), |x| a2 / (1.0 + a2 * x * x), 1e-10))
}

/// `E[f(S)]` for `S ~ N(0, σ²)` over `[−8σ, 8σ]` by adaptive Simpson.
pub fn gaussian_expectation(sigma: f64, f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let g = |s: f64| {
        let u = s / sigma;
        f(s) * norm * (-0.5 * u * u).exp()
    };
    // split at the mode so the peak is never straddled by one panel
    let half = 8.0 * sigma;
    adaptive_simpson(&g, -half, 0.0, tol / 2.0) + adaptive_simpson(&g, 0.0, half, tol / 2.0)
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}
