//! Line shapes, complex susceptibility and absorption shared by every protocol.
//!
//! Frequencies are angular and measured from line center. The susceptibility is
//!
//! ```text
//! chi(w) = int G(d) / (1/T2 + i (d - w)) dd
//! ```
//!
//! with `G` normalized to unit area, so `alpha(w) = beta * chi(w)` and the
//! resonant absorption of a symmetric line is `alpha_R(w) = pi * beta * G(w)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure_finite, Error, Result};
use crate::oracle::quadrature::{adaptive_simpson, DEFAULT_TOL};

/// `4 ln 2`: Gaussian exponent for which `delta_in` is the full width at half maximum.
pub const ZETA: f64 = 4.0 * std::f64::consts::LN_2;

/// Regularizing dephasing rate, in units of `delta_in`, used when `T2` is infinite.
pub const GAMMA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineShape {
    /// `G(d) = delta_in / (pi (delta_in^2 + d^2))`; `delta_in` is the half width.
    Lorentzian,
    /// `G(d) = sqrt(zeta / pi) / delta_in * exp(-zeta d^2 / delta_in^2)`; `delta_in` is the full width.
    Gaussian,
}

/// Inhomogeneously broadened line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InhomogeneousLine {
    pub shape: LineShape,
    pub delta_in: f64,
    /// Phase relaxation time; `None` is infinite.
    #[serde(default)]
    pub t2: Option<f64>,
}

impl InhomogeneousLine {
    pub fn new(shape: LineShape, delta_in: f64, t2: Option<f64>) -> Result<Self> {
        let line = Self { shape, delta_in, t2 };
        line.validate()?;
        Ok(line)
    }

    pub fn lorentzian(delta_in: f64) -> Self {
        Self::new(LineShape::Lorentzian, delta_in, None).expect("positive width")
    }

    pub fn gaussian(delta_in: f64) -> Self {
        Self::new(LineShape::Gaussian, delta_in, None).expect("positive width")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_in > 0.0 && self.delta_in.is_finite()) {
            return Err(Error::InvalidInput(format!("delta_in must be positive, got {}", self.delta_in)));
        }
        if let Some(t2) = self.t2 {
            if !(t2 > 0.0) {
                return Err(Error::InvalidInput(format!("t2 must be positive, got {t2}")));
            }
        }
        Ok(())
    }

    /// Normalized spectral density `G` at detuning `delta`.
    pub fn density(&self, delta: f64) -> f64 {
        let x = delta / self.delta_in;
        match self.shape {
            LineShape::Lorentzian => 1.0 / (PI * self.delta_in * (1.0 + x * x)),
            LineShape::Gaussian => (ZETA / PI).sqrt() / self.delta_in * (-ZETA * x * x).exp(),
        }
    }

    /// Homogeneous rate `1/T2`; zero when `T2` is infinite.
    pub fn gamma(&self) -> f64 {
        self.t2.map_or(0.0, |t2| 1.0 / t2)
    }

    /// Rate used by the quadrature path: `1/T2`, floored at `GAMMA_FLOOR * delta_in`
    /// when `T2` is infinite.
    pub fn regularized_gamma(&self) -> f64 {
        match self.t2 {
            Some(t2) => 1.0 / t2,
            None => GAMMA_FLOOR * self.delta_in,
        }
    }
}

/// Propagation constants. `beta` absorbs atom number, coupling and group velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub beta: f64,
    pub length: f64,
    #[serde(default = "default_vg")]
    pub v_g: f64,
}

fn default_vg() -> f64 {
    1.0
}

impl Medium {
    pub fn new(beta: f64, length: f64, v_g: f64) -> Result<Self> {
        let m = Self { beta, length, v_g };
        m.validate()?;
        Ok(m)
    }

    /// Medium whose resonant depth `alpha_R(0) L` on `line` equals `depth` (with `L = 1`).
    pub fn with_depth(depth: f64, line: &InhomogeneousLine) -> Result<Self> {
        if !(depth >= 0.0) {
            return Err(Error::InvalidInput(format!("depth must be non-negative, got {depth}")));
        }
        Self::new(depth / (PI * line.density(0.0)), 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta must be non-negative, got {}", self.beta)));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidInput(format!("length must be positive, got {}", self.length)));
        }
        if !(self.v_g > 0.0) {
            return Err(Error::InvalidInput(format!("v_g must be positive, got {}", self.v_g)));
        }
        Ok(())
    }

    /// `alpha_R(0) L`
    pub fn resonant_depth(&self, line: &InhomogeneousLine) -> f64 {
        resonant_absorption(self, line, 0.0) * self.length
    }

    /// Free-propagation delay `L / v_g`.
    pub fn transit_time(&self) -> f64 {
        self.length / self.v_g
    }
}

/// Ensemble dephasing factor at the echo time, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct DephasingFactor(f64);

impl DephasingFactor {
    pub const NONE: DephasingFactor = DephasingFactor(1.0);

    pub fn new(gamma_e: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma_e) {
            return Err(Error::InvalidInput(format!("dephasing factor must lie in [0, 1], got {gamma_e}")));
        }
        Ok(Self(gamma_e))
    }

    /// `exp(-t_e / T2)`; a convenience, not the only admissible form.
    pub fn from_relaxation(t_e: f64, t2: f64) -> Result<Self> {
        if !(t_e >= 0.0 && t2 > 0.0) {
            return Err(Error::InvalidInput(format!("need t_e >= 0 and t2 > 0, got {t_e}, {t2}")));
        }
        Self::new((-t_e / t2).exp())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Complex susceptibility `chi(omega)`.
///
/// Lorentzian lines use the closed form `1 / (delta_in + 1/T2 - i omega)`.
/// Gaussian lines are integrated numerically with [`chi_by_quadrature`].
pub fn chi(line: &InhomogeneousLine, omega: f64) -> Result<Complex64> {
    ensure_finite("omega", omega)?;
    line.validate()?;
    match line.shape {
        LineShape::Lorentzian => Ok(Complex64::new(line.delta_in + line.gamma(), -omega).inv()),
        LineShape::Gaussian => {
            chi_by_quadrature(|d| line.density(d), line.delta_in, line.regularized_gamma(), omega)
        }
    }
}

/// `int G(d) / (gamma + i (d - omega)) dd` for an arbitrary density `G` of width scale `width`.
///
/// With `u = d - omega` the integral splits into
///
/// ```text
/// Re = int_0^inf [G(w+u) + G(w-u)] gamma / (gamma^2 + u^2) du
/// Im = -int_0^inf [G(w+u) - G(w-u)] u / (gamma^2 + u^2) du
/// ```
///
/// and both are integrated in `s = ln u`, which turns the width-`gamma`
/// kernel into a smooth bump. Panels are one unit of `s` wide and reach
/// `1e4 * width`, beyond which the tail is below the tolerance for the
/// densities used here.
pub fn chi_by_quadrature<G>(density: G, width: f64, gamma: f64, omega: f64) -> Result<Complex64>
where
    G: Fn(f64) -> f64,
{
    ensure_finite("omega", omega)?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidInput(format!("quadrature path needs gamma > 0, got {gamma}")));
    }
    let s_lo = gamma.ln() - 40.0;
    let s_hi = (1e4 * width.max(omega.abs())).ln();
    let n = ((s_hi - s_lo).ceil() as usize).max(1);
    let panels: Vec<f64> = (0..=n).map(|i| s_lo + (s_hi - s_lo) * i as f64 / n as f64).collect();
    let tol = DEFAULT_TOL * 1e-2 / width;

    let mut re = 0.0;
    let mut im = 0.0;
    for w in panels.windows(2) {
        let r = adaptive_simpson(
            |s: f64| {
                let u = s.exp();
                (density(omega + u) + density(omega - u)) * gamma * u / (gamma * gamma + u * u)
            },
            w[0],
            w[1],
            tol,
        )?;
        re += r.value;
        let i = adaptive_simpson(
            |s: f64| {
                let u = s.exp();
                -(density(omega + u) - density(omega - u)) * u * u / (gamma * gamma + u * u)
            },
            w[0],
            w[1],
            tol,
        )?;
        im += i.value;
    }
    Ok(Complex64::new(re, im))
}

/// `alpha(omega) = beta * chi(omega)`.
pub fn absorption_coefficient(medium: &Medium, line: &InhomogeneousLine, omega: f64) -> Result<Complex64> {
    medium.validate()?;
    Ok(chi(line, omega)? * medium.beta)
}

/// `alpha_R(omega) = pi * beta * G(omega)`: the even part of `Re alpha` for a symmetric line.
pub fn resonant_absorption(medium: &Medium, line: &InhomogeneousLine, omega: f64) -> f64 {
    PI * medium.beta * line.density(omega)
}

/// Atomic coherence after absorption, `sigma(Delta, z) = i a~_s(Delta) exp(-alpha(Delta) z)`,
/// up to the detuning-dependent free-evolution phase.
///
/// Rows follow `z_grid`; columns follow `spectrum`.
pub fn coherence_map(
    spectrum: &[(f64, Complex64)],
    z_grid: &[f64],
    medium: &Medium,
    line: &InhomogeneousLine,
) -> Result<Vec<Vec<Complex64>>> {
    if spectrum.is_empty() || z_grid.is_empty() {
        return Err(Error::GridMismatch("spectrum and z grid must be non-empty".into()));
    }
    let alphas: Vec<Complex64> = spectrum
        .iter()
        .map(|&(d, _)| absorption_coefficient(medium, line, d))
        .collect::<Result<_>>()?;
    let i = Complex64::new(0.0, 1.0);
    z_grid
        .iter()
        .map(|&z| {
            ensure_finite("z", z)?;
            Ok(spectrum
                .iter()
                .zip(&alphas)
                .map(|(&(_, a), &alpha)| i * a * (-alpha * z).exp())
                .collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lorentzian_chi_closed_form() {
        let line = InhomogeneousLine::lorentzian(1.0);
        assert_eq!(chi(&line, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        let c = chi(&line, 1.0).unwrap();
        assert_abs_diff_eq!(c.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.im, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn chi_rejects_nan() {
        let line = InhomogeneousLine::lorentzian(1.0);
        assert!(chi(&line, f64::NAN).is_err());
    }

    #[test]
    fn lorentzian_re_im_relation() {
        // Re chi = (omega / delta_in) Im chi for the Lorentzian closed form.
        let line = InhomogeneousLine::lorentzian(1.7);
        for k in -20..=20 {
            let w = 0.37 * k as f64;
            let c = chi(&line, w).unwrap();
            assert_abs_diff_eq!(c.re * w / 1.7, c.im, epsilon = 1e-15);
        }
    }

    #[test]
    fn absorption_scales_with_beta() {
        let line = InhomogeneousLine::lorentzian(1.0);
        let m1 = Medium::new(1.0, 1.0, 1.0).unwrap();
        let m2 = Medium::new(2.0, 1.0, 1.0).unwrap();
        assert_eq!(absorption_coefficient(&m1, &line, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        let a = absorption_coefficient(&m2, &line, 1.0).unwrap();
        assert_abs_diff_eq!(a.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.im, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn resonant_absorption_lorentzian() {
        let line = InhomogeneousLine::lorentzian(2.0);
        let m = Medium::new(3.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(resonant_absorption(&m, &line, 0.0), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(resonant_absorption(&m, &line, 2.0), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn even_part_matches_resonant_absorption() {
        let line = InhomogeneousLine::lorentzian(1.0);
        let m = Medium::new(1.3, 1.0, 1.0).unwrap();
        for k in 0..50 {
            let w = -5.0 + 0.2 * k as f64;
            let even = 0.5
                * (absorption_coefficient(&m, &line, w).unwrap() + absorption_coefficient(&m, &line, -w).unwrap())
                    .re;
            assert_abs_diff_eq!(even, resonant_absorption(&m, &line, w), epsilon = 1e-14);
        }
    }

    #[test]
    fn medium_with_depth() {
        for line in [InhomogeneousLine::lorentzian(1.0), InhomogeneousLine::gaussian(1.0)] {
            let m = Medium::with_depth(4.0, &line).unwrap();
            assert_abs_diff_eq!(m.resonant_depth(&line), 4.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn invalid_types() {
        assert!(InhomogeneousLine::new(LineShape::Gaussian, 0.0, None).is_err());
        assert!(InhomogeneousLine::new(LineShape::Gaussian, 1.0, Some(-1.0)).is_err());
        assert!(Medium::new(-1.0, 1.0, 1.0).is_err());
        assert!(Medium::new(1.0, 0.0, 1.0).is_err());
        assert!(DephasingFactor::new(1.5).is_err());
        assert_abs_diff_eq!(DephasingFactor::from_relaxation(1.0, 2.0).unwrap().value(), (-0.5f64).exp());
    }

    #[test]
    fn coherence_at_entrance_is_i_times_spectrum() {
        let line = InhomogeneousLine::lorentzian(1.0);
        let m = Medium::new(1.0, 1.0, 1.0).unwrap();
        let spec = vec![(0.0, Complex64::new(0.3, 0.1)), (0.5, Complex64::new(-0.2, 0.4))];
        let map = coherence_map(&spec, &[0.0], &m, &line).unwrap();
        for (c, (_, a)) in map[0].iter().zip(&spec) {
            assert_eq!(*c, Complex64::new(0.0, 1.0) * a);
        }
    }

    #[test]
    fn coherence_decays_at_center() {
        let line = InhomogeneousLine::lorentzian(2.0);
        let m = Medium::new(3.0, 1.0, 1.0).unwrap();
        let spec = vec![(0.0, Complex64::new(1.0, 0.0))];
        let z = [0.0, 0.5, 1.0, 2.0];
        let map = coherence_map(&spec, &z, &m, &line).unwrap();
        for (row, &zz) in map.iter().zip(&z) {
            assert_abs_diff_eq!(row[0].norm() / map[0][0].norm(), (-3.0 * zz / 2.0).exp(), epsilon = 1e-15);
        }
    }

    #[test]
    fn coherence_profile_ignores_spectral_phase() {
        let line = InhomogeneousLine::lorentzian(1.0);
        let m = Medium::new(2.0, 1.0, 1.0).unwrap();
        let grid: Vec<f64> = (0..41).map(|k| -2.0 + 0.1 * k as f64).collect();
        let plain: Vec<(f64, Complex64)> = grid.iter().map(|&d| (d, Complex64::new((-d * d).exp(), 0.0))).collect();
        let chirped: Vec<(f64, Complex64)> =
            grid.iter().map(|&d| (d, Complex64::from_polar((-d * d).exp(), 1.7 * d * d))).collect();
        let z: Vec<f64> = (0..11).map(|k| 0.1 * k as f64).collect();
        let a = coherence_map(&plain, &z, &m, &line).unwrap();
        let b = coherence_map(&chirped, &z, &m, &line).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            for (x, y) in ra.iter().zip(rb) {
                assert_abs_diff_eq!(x.norm(), y.norm(), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn grid_mismatch() {
        let line = InhomogeneousLine::lorentzian(1.0);
        let m = Medium::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(coherence_map(&[], &[0.0], &m, &line), Err(Error::GridMismatch(_))));
    }
}
