//! Fixed-step classic RK4 with a half-step Richardson check.

use crate::error::{Error, Result};

/// Relative step floor below which refinement gives up.
const MIN_REL_STEP: f64 = 1e-12;

/// Solution samples of a scalar area equation.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaProfile {
    pub z: Vec<f64>,
    pub theta: Vec<f64>,
    /// Max |y_h - y_{h/2}| / 15 over the trajectory.
    pub error_estimate: f64,
}

impl AreaProfile {
    /// `|theta(z) / theta_s0|^2` along the profile.
    pub fn efficiency_theta(&self, theta_s0: f64) -> Result<Vec<f64>> {
        self.theta
            .iter()
            .map(|&t| crate::area::efficiency_measures(t, theta_s0).map(|m| m.eta_theta))
            .collect()
    }

    /// `|tan(theta/2) / tan(theta_s0/2)|^2` along the profile.
    pub fn efficiency_tan(&self, theta_s0: f64) -> Result<Vec<f64>> {
        self.theta
            .iter()
            .map(|&t| crate::area::efficiency_measures(t, theta_s0).map(|m| m.eta_tan))
            .collect()
    }

    pub fn last(&self) -> f64 {
        *self.theta.last().expect("profile has at least one sample")
    }
}

/// One RK4 step of `y' = f(z, y)`.
pub fn rk4_step<const N: usize, F>(f: &F, z: f64, y: [f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(z, &y);
    let k2 = f(z + 0.5 * h, &axpy(&y, 0.5 * h, &k1));
    let k3 = f(z + 0.5 * h, &axpy(&y, 0.5 * h, &k2));
    let k4 = f(z + h, &axpy(&y, h, &k3));
    let mut out = y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

/// Integrates from `z0` to `z1` (either direction) in `steps` equal steps and
/// returns the states at the step boundaries, including both ends.
pub fn rk4_trajectory<const N: usize, F>(f: &F, z0: f64, z1: f64, y0: [f64; N], steps: usize) -> Vec<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let steps = steps.max(1);
    let h = (z1 - z0) / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push(y);
    for i in 0..steps {
        y = rk4_step(f, z0 + i as f64 * h, y, h);
        out.push(y);
    }
    out
}

/// Integrates to `z1` and returns the final state with a Richardson error
/// estimate from a second pass at half the step.
pub fn rk4_endpoint<const N: usize, F>(f: &F, z0: f64, z1: f64, y0: [f64; N], steps: usize) -> ([f64; N], f64)
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let coarse = *rk4_trajectory(f, z0, z1, y0, steps).last().unwrap();
    let fine = *rk4_trajectory(f, z0, z1, y0, 2 * steps.max(1)).last().unwrap();
    let err = coarse
        .iter()
        .zip(fine.iter())
        .map(|(a, b)| (a - b).abs() / 15.0)
        .fold(0.0, f64::max);
    (fine, err)
}

/// Step count for the area oracle: `h = min(1e-3 / alpha0, span / 1e4)`.
pub fn default_steps(alpha0: f64, span: f64) -> usize {
    let span = span.abs();
    if span == 0.0 {
        return 1;
    }
    let h_alpha = if alpha0 > 0.0 { 1e-3 / alpha0 } else { f64::INFINITY };
    let h = h_alpha.min(span / 1e4);
    (span / h).ceil() as usize
}

/// Integrates the scalar equation `d theta / dz = rhs(z, theta)` across
/// `z_span` with initial step `step`, halving the step until the
/// half-step Richardson error per unit length falls below 1e-9.
pub fn integrate_area_ode<F>(rhs: F, theta0: f64, z_span: (f64, f64), step: f64) -> Result<AreaProfile>
where
    F: Fn(f64, f64) -> f64,
{
    let (z0, z1) = z_span;
    crate::error::ensure_finite("theta0", theta0)?;
    crate::error::ensure_finite("z0", z0)?;
    crate::error::ensure_finite("z1", z1)?;
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("step must be positive, got {step}")));
    }
    let span = (z1 - z0).abs();
    if span == 0.0 {
        return Ok(AreaProfile { z: vec![z0], theta: vec![theta0], error_estimate: 0.0 });
    }
    let f = |z: f64, y: &[f64; 1]| [rhs(z, y[0])];
    let mut h = step.min(span);
    loop {
        if h < MIN_REL_STEP * span.max(1.0) {
            return Err(Error::StepUnderflow { step: h });
        }
        let steps = (span / h).ceil() as usize;
        let coarse = rk4_trajectory(&f, z0, z1, [theta0], steps);
        let fine = rk4_trajectory(&f, z0, z1, [theta0], 2 * steps);
        let err = coarse
            .iter()
            .enumerate()
            .map(|(i, c)| (c[0] - fine[2 * i][0]).abs() / 15.0)
            .fold(0.0, f64::max);
        if err <= 1e-9 * span.max(1.0) {
            let dz = (z1 - z0) / (2 * steps) as f64;
            let z = (0..=2 * steps).map(|i| z0 + i as f64 * dz).collect();
            let theta = fine.iter().map(|y| y[0]).collect();
            return Ok(AreaProfile { z, theta, error_estimate: err });
        }
        h *= 0.5;
    }
}
