//! RK4 drivers for the echo-area equation with each protocol's sources.
//!
//! Every driver integrates the coupled system (signal/control areas together
//! with the echo area) from its own differential equations; none evaluates a
//! closed-form solution.

use crate::error::{Error, Result};
use crate::oracle::ode::{default_steps, rk4_endpoint, AreaProfile};

/// Integrates through increasing `z_points` (starting from `z0`), recording the
/// state at each point. Step size follows [`default_steps`] over the full span.
fn sample<const N: usize, F>(f: &F, z0: f64, y0: [f64; N], z_points: &[f64], alpha0: f64) -> Result<(Vec<[f64; N]>, f64)>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let end = *z_points.last().ok_or_else(|| Error::InvalidInput("empty z grid".into()))?;
    let span = (end - z0).abs();
    let h = if span == 0.0 { 1.0 } else { span / default_steps(alpha0, span) as f64 };
    let mut out = Vec::with_capacity(z_points.len());
    let mut y = y0;
    let mut z = z0;
    let mut err: f64 = 0.0;
    let dir = if end >= z0 { 1.0 } else { -1.0 };
    for &zn in z_points {
        if (zn - z) * dir < 0.0 {
            return Err(Error::InvalidInput("z grid must be monotone away from the start point".into()));
        }
        let seg = (zn - z).abs();
        if seg > 0.0 {
            let steps = (seg / h).ceil() as usize;
            let (yn, e) = rk4_endpoint(f, z, zn, y, steps);
            y = yn;
            err = err.max(e);
        }
        z = zn;
        out.push(y);
    }
    Ok((out, err))
}

fn sorted(z_points: &[f64]) -> Result<()> {
    if z_points.windows(2).any(|w| !(w[1] >= w[0])) || z_points.iter().any(|z| !(*z >= 0.0)) {
        return Err(Error::InvalidInput("z grid must be non-negative and non-decreasing".into()));
    }
    Ok(())
}

fn profile(z_points: &[f64], theta: Vec<f64>, err: f64) -> AreaProfile {
    AreaProfile { z: z_points.to_vec(), theta, error_estimate: err }
}

/// Echo-area rate, forward sign.
fn echo_rate(theta_e: f64, p: f64, w: f64, alpha0: f64) -> f64 {
    let (s, c) = theta_e.sin_cos();
    0.5 * alpha0 * (p * (1.0 + c) + w * s)
}

/// `d theta / dz = -(alpha0 / 2) sin(theta)` from `theta(0) = theta0`.
pub fn mccall_hahn_profile(theta0: f64, alpha0: f64, z_points: &[f64]) -> Result<AreaProfile> {
    sorted(z_points)?;
    let f = |_z: f64, y: &[f64; 1]| [-0.5 * alpha0 * y[0].sin()];
    let (ys, err) = sample(&f, 0.0, [theta0], z_points, alpha0)?;
    Ok(profile(z_points, ys.iter().map(|y| y[0]).collect(), err))
}

/// Forward CRIB: signal and echo propagate together from `z = 0`.
pub fn crib_forward_profile(theta_s0: f64, gamma_e: f64, alpha0: f64, z_points: &[f64]) -> Result<AreaProfile> {
    sorted(z_points)?;
    let f = |_z: f64, y: &[f64; 2]| {
        let (ts, te) = (y[0], y[1]);
        let (s, c) = ts.sin_cos();
        [-0.5 * alpha0 * s, echo_rate(te, gamma_e * s, -c, alpha0)]
    };
    let (ys, err) = sample(&f, 0.0, [theta_s0, 0.0], z_points, alpha0)?;
    Ok(profile(z_points, ys.iter().map(|y| y[1]).collect(), err))
}

/// Backward CRIB: the signal crosses `0 -> L`, then the echo is integrated
/// from `theta_e(L) = 0` back toward `z = 0`. Returns the echo area at
/// `z_points` (non-decreasing, within `[0, L]`).
pub fn crib_backward_profile(
    theta_s0: f64,
    gamma_e: f64,
    alpha0: f64,
    length: f64,
    z_points: &[f64],
) -> Result<AreaProfile> {
    sorted(z_points)?;
    if z_points.last().is_some_and(|&z| z > length) {
        return Err(Error::InvalidInput("z grid extends beyond the medium".into()));
    }
    let signal = |_z: f64, y: &[f64; 1]| [-0.5 * alpha0 * y[0].sin()];
    let (at_l, e1) = sample(&signal, 0.0, [theta_s0], &[length], alpha0)?;

    let f = |_z: f64, y: &[f64; 2]| {
        let (ts, te) = (y[0], y[1]);
        let (s, c) = ts.sin_cos();
        [-0.5 * alpha0 * s, -echo_rate(te, gamma_e * s, -c, alpha0)]
    };
    let descending: Vec<f64> = z_points.iter().rev().copied().collect();
    let (ys, e2) = sample(&f, length, [at_l[0][0], 0.0], &descending, alpha0)?;
    let theta = ys.iter().rev().map(|y| y[1]).collect();
    Ok(profile(z_points, theta, e1.max(e2)))
}

/// Two control pulses; the second propagates through the inversion `-cos(theta_1)`
/// left by the first. Returns `(theta_1, theta_2)` profiles.
pub fn control_profiles(theta_c1: f64, theta_c2: f64, alpha0: f64, z_points: &[f64]) -> Result<(AreaProfile, AreaProfile)> {
    sorted(z_points)?;
    let f = |_z: f64, y: &[f64; 2]| {
        let (t1, t2) = (y[0], y[1]);
        [-0.5 * alpha0 * t1.sin(), -0.5 * alpha0 * t1.cos() * t2.sin()]
    };
    let (ys, err) = sample(&f, 0.0, [theta_c1, theta_c2], z_points, alpha0)?;
    Ok((
        profile(z_points, ys.iter().map(|y| y[0]).collect(), err),
        profile(z_points, ys.iter().map(|y| y[1]).collect(), err),
    ))
}

/// ROSE forward echo. State: weak-signal amplitude (linear absorption), both
/// control areas and the echo area. The source is
/// `Gamma * signal * sin^2(theta_1/2) sin^2(theta_2/2)` and the inversion
/// `-cos(theta_1) cos(theta_2)`.
pub fn rose_profile(
    theta_s0: f64,
    gamma_e: f64,
    theta_c1: f64,
    theta_c2: f64,
    alpha0: f64,
    z_points: &[f64],
) -> Result<AreaProfile> {
    sorted(z_points)?;
    let f = |_z: f64, y: &[f64; 4]| {
        let (s, t1, t2, te) = (y[0], y[1], y[2], y[3]);
        let a = (0.5 * t1).sin();
        let b = (0.5 * t2).sin();
        let p = gamma_e * s * a * a * b * b;
        let w = -t1.cos() * t2.cos();
        [
            -0.5 * alpha0 * s,
            -0.5 * alpha0 * t1.sin(),
            -0.5 * alpha0 * t1.cos() * t2.sin(),
            echo_rate(te, p, w, alpha0),
        ]
    };
    let (ys, err) = sample(&f, 0.0, [theta_s0, theta_c1, theta_c2, 0.0], z_points, alpha0)?;
    Ok(profile(z_points, ys.iter().map(|y| y[3]).collect(), err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn mccall_hahn_against_tangent_solution() {
        let z = [0.0, 1.0, 2.0, 4.0];
        let p = mccall_hahn_profile(0.9 * PI, 1.0, &z).unwrap();
        for (zi, th) in z.iter().zip(&p.theta) {
            let expect = 2.0 * ((0.45 * PI).tan() * (-zi / 2.0).exp()).atan();
            assert!((th - expect).abs() < 1e-8);
        }
        assert!(p.error_estimate < 1e-9);
    }

    #[test]
    fn zero_sources_give_zero_echo() {
        let z = [0.5, 3.0];
        assert!(crib_forward_profile(0.0, 1.0, 1.0, &z).unwrap().theta.iter().all(|&t| t == 0.0));
        assert!(rose_profile(0.1, 1.0, 0.0, 0.0, 1.0, &z).unwrap().theta.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn backward_echo_vanishes_at_exit_face() {
        let p = crib_backward_profile(1.0, 1.0, 2.0, 1.5, &[0.0, 1.5]).unwrap();
        assert_eq!(p.theta[1], 0.0);
        assert!(p.theta[0] > 0.0);
    }

    #[test]
    fn unsorted_grid_rejected() {
        assert!(mccall_hahn_profile(1.0, 1.0, &[2.0, 1.0]).is_err());
        assert!(crib_backward_profile(1.0, 1.0, 1.0, 1.0, &[0.0, 2.0]).is_err());
    }
}
