//! Imaginary error function and Dawson's integral.
//!
//! Both are computed from `scaled_erfi(x) = exp(-x^2) erfi(x)`, which stays
//! bounded for all real `x`. Small arguments use the all-positive Maclaurin
//! series of erfi (no cancellation); large arguments use the asymptotic
//! expansion of Dawson's integral, truncated at its smallest term.

use crate::error::{Error, Result};

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const SQRT_PI_OVER_TWO: f64 = 0.886_226_925_452_758;

/// Switch point between the power series and the asymptotic expansion.
const SERIES_LIMIT: f64 = 6.5;

/// `sum_n x^(2n+1) / (n! (2n+1))`, so that `erfi(x) = 2/sqrt(pi) * erfi_series(x)`.
fn erfi_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0_f64;
    loop {
        term *= x2 / (n + 1.0);
        n += 1.0;
        let contrib = term / (2.0 * n + 1.0);
        sum += contrib;
        if n > x2 && contrib.abs() <= 1e-17 * sum.abs() {
            break;
        }
        if n > 500.0 {
            break;
        }
    }
    sum
}

/// Asymptotic expansion `D(x) ~ sum_n (2n-1)!! / (2^(n+1) x^(2n+1))`.
fn dawson_asymptotic(x: f64) -> f64 {
    let inv2x2 = 1.0 / (2.0 * x * x);
    let mut term = 0.5 / x;
    let mut sum = term;
    let mut n = 0.0_f64;
    loop {
        let next = term * (2.0 * n + 1.0) * inv2x2;
        if next.abs() >= term.abs() || next.abs() <= 1e-18 * sum.abs() {
            break;
        }
        sum += next;
        term = next;
        n += 1.0;
    }
    sum
}

/// `exp(-x^2) * erfi(x)`; finite for every finite `x`.
pub fn scaled_erfi(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { f64::NAN } else { 0.0 };
    }
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        (-ax * ax).exp() * TWO_OVER_SQRT_PI * erfi_series(ax)
    } else {
        TWO_OVER_SQRT_PI * dawson_asymptotic(ax)
    };
    v.copysign(x)
}

/// Dawson's integral `F(x) = exp(-x^2) int_0^x exp(t^2) dt`.
pub fn dawson(x: f64) -> f64 {
    SQRT_PI_OVER_TWO * scaled_erfi(x)
}

/// Imaginary error function `erfi(x) = 2/sqrt(pi) int_0^x exp(t^2) dt`.
///
/// Returns [`Error::Overflow`] once the result leaves the `f64` range
/// (|x| beyond roughly 26.6); use [`scaled_erfi`] there.
pub fn erfi(x: f64) -> Result<f64> {
    crate::error::ensure_finite("x", x)?;
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        return Ok(TWO_OVER_SQRT_PI * erfi_series(x));
    }
    if ax * ax > 709.0 {
        return Err(Error::Overflow(format!(
            "erfi({x}) exceeds f64 range; use scaled_erfi"
        )));
    }
    let v = (ax * ax).exp() * scaled_erfi(ax);
    if !v.is_finite() {
        return Err(Error::Overflow(format!(
            "erfi({x}) exceeds f64 range; use scaled_erfi"
        )));
    }
    Ok(v.copysign(x))
}
