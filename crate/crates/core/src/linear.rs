//! Linear-response echo transfer functions for CRIB and GEM, and time-domain
//! echo reconstruction.
//!
//! A transfer function `H` maps the input spectrum to the echo spectrum,
//! `a~_e(w) = H(w) a~_s(+/- w)`; time-reversing protocols use `-w`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::model::{chi, DephasingFactor, InhomogeneousLine, LineShape, Medium};
use crate::oracle::optimize::{maximize_1d, polish_maximum};
use crate::oracle::transform::{self, edge_energy_fraction, Grid};
use crate::pulses::Pulse;

/// Below this offset (in units of `delta_in`) the forward-CRIB quotient is
/// evaluated by series.
pub const SERIES_CUTOFF: f64 = 1e-8;

/// Fraction of spectral energy in the outer quarter of the grid above which
/// a reconstruction is flagged as possibly aliased.
pub const ALIASING_THRESHOLD: f64 = 1e-3;

/// Sampled frequency response on the reciprocal of a pulse time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    pub omega_grid: Grid,
    pub values: Vec<Complex64>,
    /// Multiply `a~(-w)` instead of `a~(w)`.
    pub conjugate_input: bool,
}

impl TransferFunction {
    pub fn new(omega_grid: Grid, values: Vec<Complex64>, conjugate_input: bool) -> Result<Self> {
        if values.len() != omega_grid.n {
            return Err(Error::GridMismatch(format!(
                "{} values on a grid of length {}",
                values.len(),
                omega_grid.n
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput("transfer values must be finite".into()));
        }
        Ok(Self { omega_grid, values, conjugate_input })
    }

    /// Samples `f` at every grid frequency.
    pub fn from_fn<F>(omega_grid: Grid, conjugate_input: bool, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<Complex64> + Sync,
    {
        let values = omega_grid.points().par_iter().map(|&w| f(w)).collect::<Result<Vec<_>>>()?;
        Self::new(omega_grid, values, conjugate_input)
    }

    pub fn identity(omega_grid: Grid) -> Self {
        Self { omega_grid, values: vec![Complex64::new(1.0, 0.0); omega_grid.n], conjugate_input: false }
    }

    pub fn crib_backward(omega_grid: Grid, medium: &Medium, line: &InhomogeneousLine, gamma: DephasingFactor) -> Result<Self> {
        Self::from_fn(omega_grid, true, |w| crib_backward_transfer(medium, line, gamma, w))
    }

    pub fn crib_forward(omega_grid: Grid, depth: f64, line: &InhomogeneousLine, gamma: DephasingFactor) -> Result<Self> {
        Self::from_fn(omega_grid, true, |w| crib_forward_transfer(depth, line, gamma, w))
    }

    /// Flat GEM response; the nonlinear phase is applied in the time domain by [`gem_echo`].
    pub fn gem(omega_grid: Grid, kappa_eff: f64, gamma: DephasingFactor) -> Result<Self> {
        let h = gem_transfer(kappa_eff, gamma)?;
        Self::new(omega_grid, vec![Complex64::new(h, 0.0); omega_grid.n], true)
    }

    /// `|H|^2` per grid point.
    pub fn efficiency(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// Result of [`apply_transfer`].
#[derive(Debug, Clone, PartialEq)]
pub struct AppliedTransfer {
    pub echo: Pulse,
    /// Share of input spectral energy in the outer quarter of the frequency grid.
    pub aliasing_fraction: f64,
}

impl AppliedTransfer {
    pub fn aliasing_warning(&self) -> bool {
        self.aliasing_fraction > ALIASING_THRESHOLD
    }

    /// Turns an aliasing warning into an error.
    pub fn strict(self) -> Result<Pulse> {
        if self.aliasing_warning() {
            return Err(Error::Aliasing { fraction: self.aliasing_fraction });
        }
        Ok(self.echo)
    }
}

/// Multiplies the input spectrum by the transfer and transforms back.
pub fn apply_transfer(input: &Pulse, transfer: &TransferFunction) -> Result<AppliedTransfer> {
    let expected = input.grid.reciprocal();
    let g = transfer.omega_grid;
    if g.n != expected.n || (g.step - expected.step).abs() > 1e-12 * expected.step {
        return Err(Error::GridMismatch(format!(
            "transfer grid (n = {}, dw = {}) does not match the pulse spectrum grid (n = {}, dw = {})",
            g.n, g.step, expected.n, expected.step
        )));
    }
    let spec = input.spectrum()?;
    let aliasing_fraction = edge_energy_fraction(&spec);
    let echo_spec: Vec<Complex64> = (0..g.n)
        .map(|m| {
            let src = if transfer.conjugate_input { spec[g.mirror_index(m)] } else { spec[m] };
            transfer.values[m] * src
        })
        .collect();
    let env = transform::inverse(&echo_spec, &input.grid)?;
    let echo = Pulse { grid: input.grid, envelope: env, carrier_detuning: input.carrier_detuning };
    Ok(AppliedTransfer { echo, aliasing_fraction })
}

/// Backward CRIB: `Gamma (1 - exp(-alpha_R(w) L))`. Real, so dispersion-free.
pub fn crib_backward_transfer(
    medium: &Medium,
    line: &InhomogeneousLine,
    gamma: DephasingFactor,
    omega: f64,
) -> Result<Complex64> {
    ensure_finite("omega", omega)?;
    medium.validate()?;
    line.validate()?;
    let x = crate::model::resonant_absorption(medium, line, omega) * medium.length;
    Ok(Complex64::new(-gamma.value() * (-x).exp_m1(), 0.0))
}

/// `alpha_R(w) Z` for a medium of resonant depth `depth = alpha_R(0) Z`.
fn depth_at(depth: f64, line: &InhomogeneousLine, omega: f64) -> f64 {
    depth * line.density(omega) / line.density(0.0)
}

fn check_depth(depth: f64) -> Result<()> {
    ensure_finite("depth", depth)?;
    if depth < 0.0 {
        return Err(Error::InvalidInput(format!("depth must be non-negative, got {depth}")));
    }
    Ok(())
}

/// Forward CRIB transfer at resonant depth `depth = alpha_R(0) Z`.
///
/// Lorentzian lines use
/// `Gamma sin(w x / (2 delta_in)) / (w / (2 delta_in)) exp(-x / 2)`, `x = alpha_R(w) Z`,
/// with the small-offset quotient taken by series. Other shapes go through
/// [`crib_forward_transfer_general`].
pub fn crib_forward_transfer(depth: f64, line: &InhomogeneousLine, gamma: DephasingFactor, omega: f64) -> Result<Complex64> {
    ensure_finite("omega", omega)?;
    check_depth(depth)?;
    line.validate()?;
    match line.shape {
        LineShape::Lorentzian => {
            let x = depth_at(depth, line, omega);
            let h = 0.5 * omega / line.delta_in;
            let quotient = if h.abs() < 0.5 * SERIES_CUTOFF {
                x * (1.0 - (h * x).powi(2) / 6.0)
            } else {
                (h * x).sin() / h
            };
            Ok(Complex64::new(gamma.value() * quotient * (-0.5 * x).exp(), 0.0))
        }
        LineShape::Gaussian => crib_forward_transfer_general(depth, line, gamma, omega),
    }
}

/// Forward CRIB from the susceptibility of an arbitrary symmetric line:
///
/// ```text
/// H = Gamma 2 pi G(w) / (chi(w) - chi(-w)) [exp(-alpha(-w) Z / 2) - exp(-alpha(w) Z / 2)]
/// ```
///
/// The quotient is 0/0 at line center, so offsets below `SERIES_CUTOFF * delta_in`
/// are rejected.
pub fn crib_forward_transfer_general(
    depth: f64,
    line: &InhomogeneousLine,
    gamma: DephasingFactor,
    omega: f64,
) -> Result<Complex64> {
    ensure_finite("omega", omega)?;
    check_depth(depth)?;
    if omega.abs() < SERIES_CUTOFF * line.delta_in {
        return Err(Error::Domain(format!(
            "general-line forward transfer needs |omega| >= {:e} delta_in",
            SERIES_CUTOFF
        )));
    }
    let beta_z = depth / (std::f64::consts::PI * line.density(0.0));
    let cp = chi(line, omega)?;
    let cm = chi(line, -omega)?;
    let ratio = 2.0 * std::f64::consts::PI * line.density(omega) / (cp - cm);
    let diff = (-0.5 * beta_z * cm).exp() - (-0.5 * beta_z * cp).exp();
    Ok(gamma.value() * ratio * diff)
}

/// Narrowband forward CRIB, `Gamma x exp(-x / 2)` with `x = alpha_R(w) Z`.
/// Meant for `(w / 2 delta_in) x << pi / 2`; not enforced.
pub fn crib_narrowband_transfer(depth: f64, line: &InhomogeneousLine, gamma: DephasingFactor, omega: f64) -> Result<Complex64> {
    ensure_finite("omega", omega)?;
    check_depth(depth)?;
    let x = depth_at(depth, line, omega);
    Ok(Complex64::new(gamma.value() * x * (-0.5 * x).exp(), 0.0))
}

/// Forward CRIB spectral efficiency on a unit-width Lorentzian line, `Gamma = 1`.
pub fn crib_forward_efficiency(depth: f64, omega: f64) -> Result<f64> {
    let line = InhomogeneousLine::lorentzian(1.0);
    Ok(crib_forward_transfer(depth, &line, DephasingFactor::NONE, omega)?.norm_sqr())
}

/// Real-valued map over (depth rows) x (frequency columns).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyMap {
    pub depth: Vec<f64>,
    pub omega: Vec<f64>,
    pub eta: Vec<Vec<f64>>,
}

pub fn crib_forward_efficiency_map(depth_grid: &[f64], omega_grid: &[f64]) -> Result<EfficiencyMap> {
    if depth_grid.is_empty() || omega_grid.is_empty() {
        return Err(Error::InvalidInput("map grids must be non-empty".into()));
    }
    let eta = depth_grid
        .par_iter()
        .map(|&d| omega_grid.iter().map(|&w| crib_forward_efficiency(d, w)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(EfficiencyMap { depth: depth_grid.to_vec(), omega: omega_grid.to_vec(), eta })
}

/// Optimal forward-CRIB depth at one frequency offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardOptimum {
    pub omega: f64,
    /// Numerically optimal `alpha_R(0) L`.
    pub depth: f64,
    /// The same optimum expressed as `alpha_R(omega) L`.
    pub depth_at_omega: f64,
    pub eta: f64,
    /// The published closed-form optimum `alpha_R(omega) L = atan(2 w) / w`, reported for comparison.
    pub reference_depth_at_omega: f64,
    /// The published closed-form maximum `4 exp(-alpha_R(omega) L) / (1 + 4 w^2)` at that depth.
    pub reference_eta: f64,
}

/// Maximizes the forward-CRIB efficiency over depth by golden section.
///
/// The search is confined to the first lobe of `sin^2(w x / 2)`, which holds the
/// global maximum because later lobes are damped by `exp(-x)`.
pub fn crib_forward_optimal_depth(omega: f64) -> Result<ForwardOptimum> {
    ensure_finite("omega", omega)?;
    if omega.abs() >= 5.0 {
        return Err(Error::InvalidInput(format!("|omega| must be below 5 delta_in, got {omega}")));
    }
    let w2 = 1.0 + omega * omega;
    let x_max = if omega.abs() > 0.0 { (2.0 * std::f64::consts::PI / omega.abs()).min(60.0) } else { 60.0 };
    let eta = |d: f64| crib_forward_efficiency(d, omega).unwrap_or(f64::NAN);
    let m = maximize_1d(eta, (1e-9, x_max * w2), 1e-10)?;
    let m = polish_maximum(eta, m, 1e-4 * w2, 1e-5 * w2);
    let (ref_x, ref_eta) = if omega.abs() < SERIES_CUTOFF {
        (2.0, 4.0 * (-2f64).exp())
    } else {
        let x = (2.0 * omega).atan() / omega;
        (x, 4.0 / (1.0 + 4.0 * omega * omega) * (-x).exp())
    };
    Ok(ForwardOptimum {
        omega,
        depth: m.x,
        depth_at_omega: m.x / w2,
        eta: m.value,
        reference_depth_at_omega: ref_x,
        reference_eta: ref_eta,
    })
}

/// Gradient echo memory parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GemConfig {
    pub kappa_eff: f64,
    /// Stark gradient (frequency per length).
    pub chi_grad: f64,
    /// Wait before the gradient is reversed.
    pub t1: f64,
    /// Echo emission time.
    pub t_e: f64,
    #[serde(default = "unit")]
    pub length: f64,
}

fn unit() -> f64 {
    1.0
}

impl GemConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kappa_eff", self.kappa_eff), ("chi_grad", self.chi_grad), ("t1", self.t1), ("t_e", self.t_e), ("length", self.length)] {
            ensure_finite(name, v)?;
        }
        if self.kappa_eff < 0.0 || self.t1 < 0.0 {
            return Err(Error::InvalidInput("kappa_eff and t1 must be non-negative".into()));
        }
        if self.chi_grad <= 0.0 || self.length <= 0.0 {
            return Err(Error::InvalidInput("chi_grad and length must be positive".into()));
        }
        Ok(())
    }

    /// `t_m = kappa_eff / (chi L)`
    pub fn t_m(&self) -> f64 {
        self.kappa_eff / (self.chi_grad * self.length)
    }
}

/// `Gamma (1 - exp(-kappa_eff))`, the same in both geometries.
pub fn gem_transfer(kappa_eff: f64, gamma: DephasingFactor) -> Result<f64> {
    check_depth(kappa_eff)?;
    Ok(-gamma.value() * (-kappa_eff).exp_m1())
}

/// GEM efficiency. The geometry flag is accepted for symmetry with the other
/// protocols; forward and backward share one expression.
pub fn gem_efficiency(kappa_eff: f64, gamma: DephasingFactor, _geometry: crate::area::Geometry) -> Result<f64> {
    Ok(gem_transfer(kappa_eff, gamma)?.powi(2))
}

/// `phi(t) = kappa_eff ln(1 + (t - t_e) / (t1 + t_m))`.
pub fn gem_forward_phase(t: f64, cfg: &GemConfig) -> Result<f64> {
    ensure_finite("t", t)?;
    cfg.validate()?;
    let arg = 1.0 + (t - cfg.t_e) / (cfg.t1 + cfg.t_m());
    if !(arg > 0.0) {
        return Err(Error::Domain(format!("log argument {arg} <= 0 at t = {t}")));
    }
    Ok(cfg.kappa_eff * arg.ln())
}

/// Max deviation of the phase from its tangent at `t_e` over `|t - t_e| <= half_width`.
pub fn gem_chirp_deviation(cfg: &GemConfig, half_width: f64, samples: usize) -> Result<f64> {
    let slope = cfg.kappa_eff / (cfg.t1 + cfg.t_m());
    let samples = samples.max(2);
    let mut worst: f64 = 0.0;
    for i in 0..=samples {
        let dt = -half_width + 2.0 * half_width * i as f64 / samples as f64;
        let phi = gem_forward_phase(cfg.t_e + dt, cfg)?;
        worst = worst.max((phi - slope * dt).abs());
    }
    Ok(worst)
}

/// Forward GEM echo on the time axis `tau = t - t_e`:
/// `Gamma (1 - exp(-kappa)) a_s(-tau) exp(i phi(t_e + tau))`.
pub fn gem_echo(input: &Pulse, cfg: &GemConfig, gamma: DephasingFactor) -> Result<Pulse> {
    let amp = gem_transfer(cfg.kappa_eff, gamma)?;
    let reversed = crate::pulses::time_reverse(input);
    let env = reversed
        .times()
        .iter()
        .zip(&reversed.envelope)
        .map(|(&tau, &a)| Ok(a * Complex64::from_polar(amp, gem_forward_phase(cfg.t_e + tau, cfg)?)))
        .collect::<Result<Vec<_>>>()?;
    Pulse::new(input.grid, env)
}

/// AFC re-emission delay `-alpha_{R,afc}(0) L / (2 delta_in)`.
pub fn afc_group_delay(depth_afc: f64, delta_in: f64) -> Result<f64> {
    check_depth(depth_afc)?;
    if !(delta_in > 0.0) {
        return Err(Error::InvalidInput(format!("delta_in must be positive, got {delta_in}")));
    }
    Ok(-depth_afc / (2.0 * delta_in))
}
