use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section maximization of a function assumed unimodal on `bracket`.
///
/// Fails when the maximum sits on the bracket boundary, i.e. the bracket
/// does not contain an interior maximum.
pub fn maximize_1d<F>(f: F, bracket: (f64, f64), tol: f64) -> Result<Maximum>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = bracket;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidInput(format!("invalid bracket [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let (lo, hi) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a) > tol {
        if !(fc.is_finite() && fd.is_finite()) {
            return Err(Error::Search(format!("objective not finite near x = {c}")));
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
        if iterations > 500 {
            break;
        }
    }
    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    let edge = 4.0 * tol;
    if x - lo < edge || hi - x < edge {
        return Err(Error::Search(format!(
            "no interior maximum in [{lo}, {hi}] (converged to x = {x})"
        )));
    }
    Ok(Maximum { x, value })
}

/// Polishes a maximum by bisecting the sign of the central-difference slope
/// on `[x - radius, x + radius]`.
///
/// Golden section cannot resolve a flat maximum better than about
/// `sqrt(eps)` in `x`; the slope changes sign linearly, so bisection on it
/// reaches the step-size floor instead. Returns the input unchanged when the
/// slope does not change sign across the interval.
pub fn polish_maximum<F>(f: F, m: Maximum, radius: f64, h: f64) -> Maximum
where
    F: Fn(f64) -> f64,
{
    let slope = |x: f64| central_difference(&f, x, h);
    let (mut a, mut b) = (m.x - radius, m.x + radius);
    let (sa, sb) = (slope(a), slope(b));
    if !(sa > 0.0 && sb < 0.0) {
        return m;
    }
    for _ in 0..80 {
        let c = 0.5 * (a + b);
        if c <= a || c >= b {
            break;
        }
        if slope(c) > 0.0 {
            a = c;
        } else {
            b = c;
        }
    }
    let x = 0.5 * (a + b);
    let value = f(x);
    if value.is_finite() && value >= m.value - 4.0 * f64::EPSILON * m.value.abs() {
        Maximum { x, value }
    } else {
        m
    }
}

/// Central finite-difference derivative.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}
