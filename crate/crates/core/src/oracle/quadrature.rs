//! Adaptive Simpson quadrature with Richardson-corrected panels, plus
//! variable maps for semi-infinite and infinite ranges.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Default absolute tolerance used across the crate.
pub const DEFAULT_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T = f64> {
    pub value: T,
    /// Sum of per-panel Richardson estimates plus a rounding floor; never negative.
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Values that can be integrated: reals and complex numbers.
pub trait Integrand:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

struct Panel<T> {
    a: f64,
    b: f64,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: f64,
    depth: u32,
}

/// Adaptive Simpson on the finite interval `[a, b]` with absolute tolerance `tol`.
///
/// A panel is accepted when its two halves agree with the whole to `15 * tol`;
/// the accepted value carries the Richardson correction `delta / 15`.
pub fn adaptive_simpson<T, F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult<T>>
where
    T: Integrand,
    F: Fn(f64) -> T,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "finite limits required, got [{a}, {b}]; use integrate_semi_infinite"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok(QuadratureResult { value: T::zero(), error_estimate: 0.0, evaluations: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut evaluations = 3usize;
    let fa = f(lo);
    let fm = f(0.5 * (lo + hi));
    let fb = f(hi);
    for v in [fa, fm, fb] {
        if !v.is_finite_value() {
            return Err(Error::InvalidInput("integrand is not finite on the interval".into()));
        }
    }
    let whole = simpson(lo, hi, fa, fm, fb);

    let mut total = T::zero();
    let mut error = 0.0;
    let mut roundoff = 0.0;
    let mut unconverged = false;
    let mut stack = vec![Panel { a: lo, b: hi, fa, fm, fb, whole, tol, depth: 0 }];

    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        evaluations += 2;
        if !(flm.is_finite_value() && frm.is_finite_value()) {
            return Err(Error::InvalidInput("integrand is not finite on the interval".into()));
        }
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let sum = left + right;
        let delta = sum - p.whole;
        let floor = 64.0 * f64::EPSILON * (left.magnitude() + right.magnitude());
        let tol_eff = p.tol.max(floor);
        let tiny = (p.b - p.a) <= 8.0 * f64::EPSILON * p.a.abs().max(p.b.abs()).max(1.0);

        if delta.magnitude() <= 15.0 * tol_eff || p.depth >= MAX_DEPTH || tiny {
            if delta.magnitude() > 15.0 * tol_eff {
                unconverged = true;
            }
            total = total + sum + delta * (1.0 / 15.0);
            error += delta.magnitude() / 15.0;
            roundoff += floor;
        } else {
            let half = 0.5 * p.tol;
            stack.push(Panel {
                a: m,
                b: p.b,
                fa: p.fm,
                fm: frm,
                fb: p.fb,
                whole: right,
                tol: half,
                depth: p.depth + 1,
            });
            stack.push(Panel {
                a: p.a,
                b: m,
                fa: p.fa,
                fm: flm,
                fb: p.fm,
                whole: left,
                tol: half,
                depth: p.depth + 1,
            });
        }
    }

    let estimate = error + roundoff;
    if unconverged && estimate > tol {
        return Err(Error::QuadratureNonConvergence { estimate, tol });
    }
    Ok(QuadratureResult { value: total * sign, error_estimate: estimate, evaluations })
}

fn simpson<T: Integrand>(a: f64, b: f64, fa: T, fm: T, fb: T) -> T {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

/// Change of variables used to map `[a, inf)` onto `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemiInfiniteMap {
    /// `x = a + s t / (1 - t)`; handles algebraically decaying tails.
    Rational,
    /// `x = a + s atanh(t)`; suited to integrands with Gaussian or exponential decay.
    Tanh,
}

/// Direction of the infinite end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// `int_a^inf`
    Upper,
    /// `int_-inf^a`
    Lower,
}

/// Integral over a half-line. `scale` sets the length scale of the map.
///
/// Points where the Jacobian-weighted integrand is not finite (the mapped
/// endpoint `t = 1`) contribute zero.
pub fn integrate_semi_infinite<T, F>(
    f: F,
    a: f64,
    tail: Tail,
    map: SemiInfiniteMap,
    scale: f64,
    tol: f64,
) -> Result<QuadratureResult<T>>
where
    T: Integrand,
    F: Fn(f64) -> T,
{
    crate::error::ensure_finite("a", a)?;
    if !(scale > 0.0) {
        return Err(Error::InvalidInput(format!("map scale must be positive, got {scale}")));
    }
    let orient = match tail {
        Tail::Upper => 1.0,
        Tail::Lower => -1.0,
    };
    let g = |t: f64| -> T {
        if t >= 1.0 {
            return T::zero();
        }
        let (offset, jac) = match map {
            SemiInfiniteMap::Rational => (scale * t / (1.0 - t), scale / ((1.0 - t) * (1.0 - t))),
            SemiInfiniteMap::Tanh => (scale * t.atanh(), scale / (1.0 - t * t)),
        };
        let v = f(a + orient * offset) * jac;
        if v.is_finite_value() {
            v
        } else {
            T::zero()
        }
    };
    adaptive_simpson(g, 0.0, 1.0, tol)
}

/// Integral over the whole real line, split at `center`.
pub fn integrate_real_line<T, F>(f: F, center: f64, scale: f64, tol: f64) -> Result<QuadratureResult<T>>
where
    T: Integrand,
    F: Fn(f64) -> T,
{
    let up = integrate_semi_infinite(&f, center, Tail::Upper, SemiInfiniteMap::Rational, scale, 0.5 * tol)?;
    let down = integrate_semi_infinite(&f, center, Tail::Lower, SemiInfiniteMap::Rational, scale, 0.5 * tol)?;
    Ok(QuadratureResult {
        value: up.value + down.value,
        error_estimate: up.error_estimate + down.error_estimate,
        evaluations: up.evaluations + down.evaluations,
    })
}

/// Integrates over consecutive panels `[points[i], points[i+1]]`, each adaptively.
pub fn integrate_panels<T, F>(f: F, points: &[f64], tol: f64) -> Result<QuadratureResult<T>>
where
    T: Integrand,
    F: Fn(f64) -> T,
{
    if points.len() < 2 {
        return Err(Error::InvalidInput("need at least two panel boundaries".into()));
    }
    let per = tol / (points.len() - 1) as f64;
    let mut acc = QuadratureResult { value: T::zero(), error_estimate: 0.0, evaluations: 0 };
    for w in points.windows(2) {
        let r = adaptive_simpson(&f, w[0], w[1], per)?;
        acc.value = acc.value + r.value;
        acc.error_estimate += r.error_estimate;
        acc.evaluations += r.evaluations;
    }
    Ok(acc)
}
