//! Pulse-area theorem for photon echoes.
//!
//! The echo area obeys
//!
//! ```text
//! +/- d theta_e / dz = (alpha0 / 2) [2 P_e cos^2(theta_e / 2) + W_e sin(theta_e)]
//! ```
//!
//! (upper sign forward, lower sign backward). With `u = tan(theta_e / 2)` the
//! equation is linear, `+/- u' = (alpha0 / 2)(P_e + W_e u)`, which is where every
//! closed form below comes from. All solutions are tangent-parameterized and
//! therefore singular at areas of exactly pi.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure_finite, Error, Result};
use crate::oracle::optimize::{maximize_1d, Maximum};
use crate::oracle::quadrature::adaptive_simpson;

/// Inputs within this distance of pi are rejected.
pub const BIFURCATION_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Forward,
    Backward,
}

impl Geometry {
    /// `+1` forward, `-1` backward.
    pub fn sign(self) -> f64 {
        match self {
            Geometry::Forward => 1.0,
            Geometry::Backward => -1.0,
        }
    }
}

/// How the `Gamma * theta_s0` factor enters the ROSE formal solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrefactorConvention {
    /// Factor applied once, outside the integral.
    #[default]
    Single,
    /// Factor applied outside the integral *and* inside the source term.
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaProtocolConfig {
    /// Input signal area, `[0, pi)`.
    pub theta_s0: f64,
    /// Control areas, `[0, pi]`.
    #[serde(default)]
    pub theta_c1: f64,
    #[serde(default)]
    pub theta_c2: f64,
    /// Dephasing factor `Gamma(t_e)`.
    pub gamma_e: f64,
    /// Resonant absorption `alpha_R(0)`.
    pub alpha0: f64,
    pub length: f64,
    pub geometry: Geometry,
}

impl AreaProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("theta_s0", self.theta_s0),
            ("theta_c1", self.theta_c1),
            ("theta_c2", self.theta_c2),
            ("gamma_e", self.gamma_e),
            ("alpha0", self.alpha0),
            ("length", self.length),
        ] {
            ensure_finite(name, v)?;
        }
        if !(0.0..PI).contains(&self.theta_s0) {
            return Err(Error::InvalidInput(format!("theta_s0 must lie in [0, pi), got {}", self.theta_s0)));
        }
        for (name, v) in [("theta_c1", self.theta_c1), ("theta_c2", self.theta_c2)] {
            if !(0.0..=PI).contains(&v) {
                return Err(Error::InvalidInput(format!("{name} must lie in [0, pi], got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.gamma_e) {
            return Err(Error::InvalidInput(format!("gamma_e must lie in [0, 1], got {}", self.gamma_e)));
        }
        if self.alpha0 < 0.0 || self.length < 0.0 {
            return Err(Error::InvalidInput("alpha0 and length must be non-negative".into()));
        }
        Ok(())
    }
}

/// Echo source terms: phasing polarization and resonant inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EchoSource {
    pub p_e: f64,
    pub w_e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyMeasures {
    /// `|theta_e / theta_s0|^2`
    pub eta_theta: f64,
    /// `|tan(theta_e / 2) / tan(theta_s0 / 2)|^2`
    pub eta_tan: f64,
}

/// `tan(theta / 2)`, refusing areas at the bifurcation point.
fn half_tan(name: &'static str, theta: f64) -> Result<f64> {
    ensure_finite(name, theta)?;
    if (theta.abs() - PI).abs() < BIFURCATION_EPS {
        return Err(Error::Bifurcation { name, value: theta });
    }
    Ok((0.5 * theta).tan())
}

fn from_half_tan(u: f64) -> f64 {
    2.0 * u.atan()
}

fn check_depth(name: &str, x: f64) -> Result<()> {
    ensure_finite(name, x)?;
    if x < 0.0 {
        return Err(Error::InvalidInput(format!("{name} must be non-negative, got {x}")));
    }
    Ok(())
}

/// Signal area after propagating to `z`: `2 atan(tan(theta0/2) exp(-alpha0 z / 2))`.
pub fn mccall_hahn_area(z: f64, theta0: f64, alpha0: f64) -> Result<f64> {
    let s0 = half_tan("theta0", theta0)?;
    if !(0.0..PI).contains(&theta0) {
        return Err(Error::InvalidInput(format!("theta0 must lie in [0, pi), got {theta0}")));
    }
    check_depth("alpha0", alpha0)?;
    check_depth("z", z)?;
    Ok(from_half_tan(s0 * (-0.5 * alpha0 * z).exp()))
}

/// `d theta_e / dz`; `geometry_sign` is `+1` forward and `-1` backward.
pub fn area_ode_rhs(theta_e: f64, p_e: f64, w_e: f64, alpha0: f64, geometry_sign: f64) -> f64 {
    let c = (0.5 * theta_e).cos();
    geometry_sign * 0.5 * alpha0 * (2.0 * p_e * c * c + w_e * theta_e.sin())
}

/// Backward-echo area inside the medium, `0 <= z <= L`, emitted toward `z = 0`.
pub fn crib_backward_area(z: f64, cfg: &AreaProtocolConfig) -> Result<f64> {
    cfg.validate()?;
    let s0 = half_tan("theta_s0", cfg.theta_s0)?;
    check_depth("z", z)?;
    if z > cfg.length {
        return Err(Error::InvalidInput(format!("z = {z} lies beyond the medium (L = {})", cfg.length)));
    }
    let a = cfg.alpha0;
    let l = cfg.length;
    let u = cfg.gamma_e * s0 * (-0.5 * a * z).exp() * -(-a * (l - z)).exp_m1() / (1.0 + s0 * s0 * (-a * l).exp());
    Ok(from_half_tan(u))
}

/// Area of the backward echo leaving the medium at `z = 0`.
pub fn crib_backward_echo_area(cfg: &AreaProtocolConfig) -> Result<f64> {
    crib_backward_area(0.0, cfg)
}

/// Forward-echo area at depth `z`.
pub fn crib_forward_area(z: f64, cfg: &AreaProtocolConfig) -> Result<f64> {
    cfg.validate()?;
    let s0 = half_tan("theta_s0", cfg.theta_s0)?;
    check_depth("z", z)?;
    let x = cfg.alpha0 * z;
    let u = cfg.gamma_e * s0 * x * (-0.5 * x).exp() / (1.0 + s0 * s0 * (-x).exp());
    Ok(from_half_tan(u))
}

/// CRIB echo area at `z` for the configured geometry.
pub fn crib_area(z: f64, cfg: &AreaProtocolConfig) -> Result<f64> {
    match cfg.geometry {
        Geometry::Forward => crib_forward_area(z, cfg),
        Geometry::Backward => crib_backward_area(z, cfg),
    }
}

/// Depth `alpha0 z` at which the forward echo area peaks, with the peak area.
pub fn crib_forward_area_peak(theta_s0: f64, gamma_e: f64) -> Result<Maximum> {
    let cfg = AreaProtocolConfig {
        theta_s0,
        theta_c1: 0.0,
        theta_c2: 0.0,
        gamma_e,
        alpha0: 1.0,
        length: 1.0,
        geometry: Geometry::Forward,
    };
    cfg.validate()?;
    half_tan("theta_s0", theta_s0)?;
    maximize_1d(|x| crib_forward_area(x, &cfg).unwrap_or(f64::NAN), (1e-6, 80.0), 1e-10)
}

/// Control areas after propagating to `z`; the second control travels through
/// the inversion left by the first.
pub fn control_pulse_areas(z: f64, theta_c1: f64, theta_c2: f64, alpha0: f64) -> Result<(f64, f64)> {
    let b1 = half_tan("theta_c1", theta_c1)?;
    let b2 = half_tan("theta_c2", theta_c2)?;
    for (name, v) in [("theta_c1", theta_c1), ("theta_c2", theta_c2)] {
        if !(0.0..PI).contains(&v) {
            return Err(Error::InvalidInput(format!("{name} must lie in [0, pi), got {v}")));
        }
    }
    check_depth("alpha0", alpha0)?;
    check_depth("z", z)?;
    let x = alpha0 * z;
    let t1 = b1 * (-0.5 * x).exp();
    // b2 (1 + b1^2) e^{x/2} / (e^x + b1^2), written to stay finite for large x.
    let t2 = b2 * (1.0 + b1 * b1) * (-0.5 * x).exp() / (1.0 + b1 * b1 * (-x).exp());
    Ok((from_half_tan(t1), from_half_tan(t2)))
}

/// ROSE echo sources at `z` for a weak signal.
pub fn rose_sources(z: f64, cfg: &AreaProtocolConfig) -> Result<EchoSource> {
    cfg.validate()?;
    let (t1, t2) = control_pulse_areas(z, cfg.theta_c1, cfg.theta_c2, cfg.alpha0)?;
    let s1 = (0.5 * t1).sin();
    let s2 = (0.5 * t2).sin();
    Ok(EchoSource {
        p_e: cfg.gamma_e * (-0.5 * cfg.alpha0 * z).exp() * cfg.theta_s0 * s1 * s1 * s2 * s2,
        w_e: -t1.cos() * t2.cos(),
    })
}

/// ROSE echo area from the formal integral solution, by nested adaptive quadrature.
pub fn rose_formal_solution(z: f64, cfg: &AreaProtocolConfig, convention: PrefactorConvention) -> Result<f64> {
    cfg.validate()?;
    check_depth("z", z)?;
    control_pulse_areas(0.0, cfg.theta_c1, cfg.theta_c2, cfg.alpha0)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    let a = cfg.alpha0;
    let amp = cfg.gamma_e * cfg.theta_s0;
    let source = |zp: f64| -> Result<f64> {
        let s = rose_sources(zp, cfg)?;
        Ok(match convention {
            PrefactorConvention::Single if amp != 0.0 => s.p_e / amp,
            PrefactorConvention::Single => {
                // Same shape with unit amplitude.
                let unit = AreaProtocolConfig { gamma_e: 1.0, theta_s0: 1.0, ..*cfg };
                rose_sources(zp, &unit)?.p_e
            }
            PrefactorConvention::Double => s.p_e,
        })
    };
    let inversion = |zp: f64| rose_sources(zp, cfg).map(|s| s.w_e).unwrap_or(f64::NAN);

    let tol = 1e-13 * z.max(1.0);
    let failure = std::cell::RefCell::new(None);
    let outer = adaptive_simpson(
        |zp: f64| {
            let inner = if zp < z {
                match adaptive_simpson(inversion, zp, z, tol) {
                    Ok(r) => r.value,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                }
            } else {
                0.0
            };
            match source(zp) {
                Ok(p) => p * (0.5 * a * inner).exp(),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        z,
        tol,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(from_half_tan(0.5 * amp * a * outer.value))
}

/// `Phi * A` for the ROSE closed form at depth `x = alpha0 z`, in terms of the
/// control tangents `b1 = tan(theta_c1/2)` and `b2 = tan(theta_c2/2)`.
pub fn rose_gain_factor(x: f64, b1: f64, b2: f64) -> Result<f64> {
    check_depth("alpha0 z", x)?;
    if b1 == 0.0 {
        return Err(Error::Domain("first control area is zero: closed form has a 1/tan^2 factor".into()));
    }
    let q1 = b1 * b1;
    let q2 = b2 * b2;
    let inv = 1.0 / q1;
    let e = x.exp();
    let em1 = x.exp_m1();
    let a = x - em1 / ((1.0 + q1) * (1.0 + inv * e)) - (inv * em1 / (1.0 + inv)).ln_1p();
    let m = q2 * (1.0 + q1 * q1) + 2.0 * q1 * (1.0 + q2);
    // Numerator and denominator scaled by e^{-2x} to avoid overflow.
    let phi = (-1.5 * x).exp() * q2 * (1.0 + q1).powi(2) * (q1 + e) / (q1 * (q1 * q1 * (-2.0 * x).exp() + m * (-x).exp() + 1.0));
    Ok(phi * a)
}

/// ROSE echo area in closed form.
pub fn rose_closed_form(z: f64, cfg: &AreaProtocolConfig) -> Result<f64> {
    cfg.validate()?;
    check_depth("z", z)?;
    let b1 = half_tan("theta_c1", cfg.theta_c1)?;
    let b2 = half_tan("theta_c2", cfg.theta_c2)?;
    let g = rose_gain_factor(cfg.alpha0 * z, b1, b2)?;
    Ok(from_half_tan(0.5 * cfg.gamma_e * cfg.theta_s0 * g))
}

pub fn efficiency_measures(theta_e: f64, theta_s0: f64) -> Result<EfficiencyMeasures> {
    ensure_finite("theta_e", theta_e)?;
    ensure_finite("theta_s0", theta_s0)?;
    if theta_s0 == 0.0 {
        return Err(Error::UndefinedMeasure("input area is zero".into()));
    }
    let ts = half_tan("theta_s0", theta_s0)?;
    let te = half_tan("theta_e", theta_e)?;
    Ok(EfficiencyMeasures {
        eta_theta: (theta_e / theta_s0).powi(2),
        eta_tan: (te / ts).powi(2),
    })
}

/// Area efficiency `eta_theta` over control area (rows) and depth `alpha0 z` (columns).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainMap {
    pub theta_c: Vec<f64>,
    pub alphaz: Vec<f64>,
    pub eta: Vec<Vec<f64>>,
}

/// ROSE gain map with equal control areas.
///
/// `cfg.theta_s0 = 0` selects the weak-signal limit `(Gamma Phi A)^2`;
/// otherwise the full arctangent is used. A control area of exactly pi uses
/// the analytic limit `alpha0 z exp(-alpha0 z / 2)` of `Phi A`, and zero
/// control area gives no echo.
pub fn rose_gain_map(theta_c_grid: &[f64], alphaz_grid: &[f64], cfg: &AreaProtocolConfig) -> Result<GainMap> {
    if theta_c_grid.is_empty() || alphaz_grid.is_empty() {
        return Err(Error::InvalidInput("gain map grids must be non-empty".into()));
    }
    let base = AreaProtocolConfig { theta_c1: 0.0, theta_c2: 0.0, ..*cfg };
    base.validate()?;
    for &x in alphaz_grid {
        check_depth("alpha0 z", x)?;
    }
    let eta = theta_c_grid
        .par_iter()
        .map(|&tc| -> Result<Vec<f64>> {
            ensure_finite("theta_c", tc)?;
            if !(0.0..=PI).contains(&tc) {
                return Err(Error::InvalidInput(format!("theta_c must lie in [0, pi], got {tc}")));
            }
            alphaz_grid
                .iter()
                .map(|&x| {
                    let g = if tc == 0.0 {
                        0.0
                    } else if (tc - PI).abs() < BIFURCATION_EPS {
                        x * (-0.5 * x).exp()
                    } else {
                        let b = (0.5 * tc).tan();
                        rose_gain_factor(x, b, b)?
                    };
                    if cfg.theta_s0 == 0.0 {
                        Ok((cfg.gamma_e * g).powi(2))
                    } else {
                        let te = from_half_tan(0.5 * cfg.gamma_e * cfg.theta_s0 * g);
                        Ok(efficiency_measures(te, cfg.theta_s0)?.eta_theta)
                    }
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GainMap { theta_c: theta_c_grid.to_vec(), alphaz: alphaz_grid.to_vec(), eta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cfg(theta_s0: f64, gamma_e: f64, alpha0: f64, length: f64) -> AreaProtocolConfig {
        AreaProtocolConfig {
            theta_s0,
            theta_c1: 0.0,
            theta_c2: 0.0,
            gamma_e,
            alpha0,
            length,
            geometry: Geometry::Backward,
        }
    }

    #[test]
    fn mccall_hahn_basics() {
        assert_eq!(mccall_hahn_area(3.0, 0.0, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(mccall_hahn_area(0.0, 1.2, 1.0).unwrap(), 1.2, epsilon = 1e-15);
        assert!(matches!(mccall_hahn_area(1.0, PI, 1.0), Err(Error::Bifurcation { .. })));
        assert!(matches!(mccall_hahn_area(1.0, PI - 1e-10, 1.0), Err(Error::Bifurcation { .. })));
    }

    #[test]
    fn rhs_limits() {
        let t = 0.7;
        assert_abs_diff_eq!(area_ode_rhs(t, 0.0, -1.0, 2.0, 1.0), -t.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(area_ode_rhs(0.0, 0.3, 0.5, 2.0, 1.0), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(area_ode_rhs(PI, 0.0, 0.5, 2.0, 1.0), 0.0, epsilon = 1e-15);
        assert_eq!(area_ode_rhs(t, 0.2, 0.1, 1.0, -1.0), -area_ode_rhs(t, 0.2, 0.1, 1.0, 1.0));
    }

    #[test]
    fn backward_limits() {
        let ts = 0.6 * PI;
        let thin = crib_backward_echo_area(&cfg(ts, 0.8, 0.01, 1.0)).unwrap();
        let lin = 0.8 * ts.sin() * 0.01;
        assert!((thin - lin).abs() < 0.01 * lin);
        let thick = crib_backward_echo_area(&cfg(ts, 1.0, 20.0, 1.0)).unwrap();
        assert!((thick - ts).abs() < 1e-6);
        assert_eq!(crib_backward_area(1.0, &cfg(ts, 1.0, 2.0, 1.0)).unwrap(), 0.0);
        assert!(crib_backward_area(1.5, &cfg(ts, 1.0, 2.0, 1.0)).is_err());
    }

    #[test]
    fn forward_linear_limit_and_origin() {
        let c = cfg(1e-4, 0.9, 1.0, 5.0);
        assert_eq!(crib_forward_area(0.0, &c).unwrap(), 0.0);
        let x: f64 = 2.5;
        let expect = 0.9 * 1e-4 * x * (-x / 2.0).exp();
        assert!((crib_forward_area(x, &c).unwrap() - expect).abs() < 1e-8 * expect);
    }

    #[test]
    fn forward_peak_satisfies_stated_condition() {
        for ts in [0.1 * PI, 0.5 * PI, 0.8 * PI] {
            let peak = crib_forward_area_peak(ts, 1.0).unwrap();
            let ths = mccall_hahn_area(peak.x, ts, 1.0).unwrap();
            assert!((peak.x * ths.cos() - 2.0).abs() < 1e-6, "theta_s0 = {ts}: x = {}", peak.x);
            assert!(peak.x >= 2.0 - 1e-6);
        }
    }

    #[test]
    fn controls_at_origin_and_amplification() {
        let (a, b) = control_pulse_areas(0.0, 0.3, 0.4, 1.0).unwrap();
        assert_abs_diff_eq!(a, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.4, epsilon = 1e-15);
        let near = PI - 1e-4;
        let (_, b1) = control_pulse_areas(0.5, near, near, 1.0).unwrap();
        let (_, b2) = control_pulse_areas(1.0, near, near, 1.0).unwrap();
        assert!(b2 > b1 && b1 > near - 1e-6);
        assert!(control_pulse_areas(1.0, PI, 0.5, 1.0).is_err());
    }

    #[test]
    fn rose_source_limits() {
        let mut c = cfg(0.01, 0.9, 1.0, 1.0);
        c.theta_c1 = PI - 1e-6;
        c.theta_c2 = PI - 1e-6;
        let s = rose_sources(0.0, &c).unwrap();
        assert_abs_diff_eq!(s.p_e, 0.9 * 0.01, epsilon = 1e-12);
        assert_abs_diff_eq!(s.w_e, -1.0, epsilon = 1e-11);
        c.theta_c1 = 0.0;
        c.theta_c2 = 0.0;
        assert_eq!(rose_sources(1.0, &c).unwrap().p_e, 0.0);
    }

    #[test]
    fn rose_source_composition() {
        let mut c = cfg(0.01, 1.0, 1.0, 1.0);
        c.theta_c1 = 0.8 * PI;
        c.theta_c2 = 0.8 * PI;
        let (t1, t2) = control_pulse_areas(1.0, c.theta_c1, c.theta_c2, 1.0).unwrap();
        let s = rose_sources(1.0, &c).unwrap();
        let expect = (-0.5f64).exp() * 0.01 * ((t1 / 2.0).sin() * (t2 / 2.0).sin()).powi(2);
        assert_abs_diff_eq!(s.p_e, expect, epsilon = 1e-16);
        assert_abs_diff_eq!(s.w_e, -t1.cos() * t2.cos(), epsilon = 1e-16);
    }

    #[test]
    fn rose_pi_limit() {
        let b = 1e6;
        for x in [0.5, 2.0, 4.0] {
            let g = rose_gain_factor(x, b, b).unwrap();
            assert!((g - x * (-x / 2.0f64).exp()).abs() < 1e-9, "x = {x}: {g}");
        }
        assert_eq!(rose_gain_factor(0.0, 2.0, 3.0).unwrap(), 0.0);
        assert!(matches!(rose_gain_factor(1.0, 0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn rose_formal_matches_closed_form() {
        let mut c = cfg(0.01, 1.0, 1.0, 3.0);
        c.theta_c1 = 0.7 * PI;
        c.theta_c2 = 0.7 * PI;
        let formal = rose_formal_solution(3.0, &c, PrefactorConvention::Single).unwrap();
        let closed = rose_closed_form(3.0, &c).unwrap();
        assert!((formal - closed).abs() < 1e-7, "{formal} vs {closed}");
        // The alternative reading scales the argument by another factor of Gamma theta_s0.
        let double = rose_formal_solution(3.0, &c, PrefactorConvention::Double).unwrap();
        assert!((double - 0.01 * closed).abs() < 1e-8);
    }

    #[test]
    fn rose_formal_limits() {
        let mut c = cfg(0.02, 0.9, 1.0, 3.0);
        c.theta_c1 = 0.0;
        assert_eq!(rose_formal_solution(2.0, &c, PrefactorConvention::Single).unwrap(), 0.0);
        // Exactly pi is a bifurcation input; approach it instead.
        c.theta_c1 = PI - 1e-7;
        c.theta_c2 = PI - 1e-7;
        let x: f64 = 2.0;
        let got = rose_formal_solution(x, &c, PrefactorConvention::Single).unwrap();
        let expect = 2.0 * (0.5 * 0.9 * 0.02 * x * (-x / 2.0).exp()).atan();
        assert!((got - expect).abs() < 1e-10);
        c.theta_c1 = PI;
        assert!(matches!(rose_formal_solution(x, &c, PrefactorConvention::Single), Err(Error::Bifurcation { .. })));
    }

    #[test]
    fn measures() {
        let m = efficiency_measures(0.4, 0.4).unwrap();
        assert_eq!((m.eta_theta, m.eta_tan), (1.0, 1.0));
        let m = efficiency_measures(1e-3, 2e-3).unwrap();
        assert!((m.eta_theta - m.eta_tan).abs() < 1e-6);
        assert!(matches!(efficiency_measures(0.1, 0.0), Err(Error::UndefinedMeasure(_))));
    }

    #[test]
    fn gain_map_pi_column_and_peak() {
        let mut c = cfg(0.0, 1.0, 1.0, 1.0);
        c.geometry = Geometry::Forward;
        let xs: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        let map = rose_gain_map(&[0.0, 0.8 * PI, PI], &xs, &c).unwrap();
        for (j, &x) in xs.iter().enumerate() {
            assert_eq!(map.eta[0][j], 0.0);
            let expect = x * x * (-x).exp();
            assert!((map.eta[2][j] - expect).abs() < 1e-15);
        }
        assert!(map.eta[1].iter().any(|&e| e > 1.0));
    }

    #[test]
    fn gamma_scales_tangent() {
        let mut c = cfg(0.7, 1.0, 1.3, 2.0);
        c.theta_c1 = 0.6 * PI;
        c.theta_c2 = 0.7 * PI;
        let scaled = AreaProtocolConfig { gamma_e: 0.4, ..c };
        for f in [crib_backward_area, crib_forward_area, rose_closed_form] {
            let a = (f(0.5, &c).unwrap() / 2.0).tan();
            let b = (f(0.5, &scaled).unwrap() / 2.0).tan();
            assert!((b - 0.4 * a).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn backward_area_monotone_in_depth(ts in 0.01..3.1f64, g in 0.05..1.0f64, al in 0.0..15.0f64, d in 0.001..1.0f64) {
            let a = crib_backward_echo_area(&cfg(ts, g, al, 1.0)).unwrap();
            let b = crib_backward_echo_area(&cfg(ts, g, al + d, 1.0)).unwrap();
            prop_assert!(b >= a);
        }

        #[test]
        fn areas_stay_in_range(ts in 0.0..(PI - 1e-3), g in 0.0..1.0f64, x in 0.0..10.0f64) {
            let mut c = cfg(ts, g, 1.0, 10.0);
            for v in [crib_forward_area(x, &c).unwrap(), crib_backward_area(x, &c).unwrap()] {
                prop_assert!(v > -PI && v <= PI);
            }
            c.theta_c1 = 0.5;
            c.theta_c2 = 2.5;
            let v = rose_closed_form(x, &c).unwrap();
            prop_assert!(v > -PI && v <= PI);
        }

        #[test]
        fn mccall_hahn_decreases(t0 in 0.0..(PI - 1e-3), z in 0.0..5.0f64) {
            prop_assert!(mccall_hahn_area(z, t0, 1.0).unwrap() <= t0 + 1e-15);
        }
    }
}
