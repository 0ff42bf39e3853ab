//! Sampled pulse envelopes and the metrics computed on them.

use num_complex::Complex64;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::oracle::transform::{self, Grid};

/// Complex envelope on a uniform, centered time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub grid: Grid,
    pub envelope: Vec<Complex64>,
    /// Carrier offset from line center; bookkeeping only.
    pub carrier_detuning: f64,
}

impl Pulse {
    pub fn new(grid: Grid, envelope: Vec<Complex64>) -> Result<Self> {
        if envelope.len() != grid.n {
            return Err(Error::GridMismatch(format!(
                "{} samples on a grid of length {}",
                envelope.len(),
                grid.n
            )));
        }
        if envelope.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput("envelope must be finite".into()));
        }
        Ok(Self { grid, envelope, carrier_detuning: 0.0 })
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.points()
    }

    /// `sum |a_k|^2 dt`
    pub fn energy(&self) -> f64 {
        self.envelope.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.step
    }

    /// Spectrum on the reciprocal grid, using the crate-wide transform convention.
    pub fn spectrum(&self) -> Result<Vec<Complex64>> {
        transform::forward(&self.envelope, &self.grid)
    }

    /// `sum |a~_m|^2 dw`
    pub fn spectral_energy(&self) -> Result<f64> {
        let dw = self.grid.reciprocal().step;
        Ok(self.spectrum()?.iter().map(|v| v.norm_sqr()).sum::<f64>() * dw)
    }

    /// Intensity-weighted RMS duration about the intensity centroid.
    pub fn rms_duration(&self) -> f64 {
        rms_width(&self.times(), &self.envelope)
    }

    /// Half width at `1/e` of the intensity maximum.
    pub fn duration_hwem(&self) -> Result<f64> {
        hwem(&self.times(), &self.envelope)
    }

    pub fn scaled(&self, factor: Complex64) -> Pulse {
        Pulse {
            grid: self.grid,
            envelope: self.envelope.iter().map(|v| v * factor).collect(),
            carrier_detuning: self.carrier_detuning,
        }
    }

    /// Two-column complex CSV: header `t,re,im`, one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im\n");
        for (t, v) in self.times().iter().zip(&self.envelope) {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", t, v.re, v.im);
        }
        out
    }

    /// Parses the format written by [`Pulse::to_csv`].
    pub fn from_csv(text: &str) -> Result<Pulse> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("t,") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::InvalidInput(format!("line {}: expected 3 columns", lineno + 1)));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("line {}: {e}", lineno + 1)))
            };
            times.push(parse(cols[0])?);
            values.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
        }
        if times.len() < 2 {
            return Err(Error::InvalidInput("need at least two samples".into()));
        }
        let step = times[1] - times[0];
        let grid = Grid::new(times.len(), step)?;
        for (k, t) in times.iter().enumerate() {
            if (t - grid.point(k)).abs() > 1e-9 * step.abs().max(1.0) {
                return Err(Error::GridMismatch(format!(
                    "sample {k} at t = {t} is off the centered uniform grid"
                )));
            }
        }
        Pulse::new(grid, values)
    }
}

/// `a(t) = A exp(-t^2 / (2 dt_s^2))`: intensity half width at `1/e` is `dt_s`,
/// spectral energy half width at `1/e` is `1 / dt_s`.
pub fn gaussian_pulse(duration: f64, amplitude: f64, grid: Grid) -> Result<Pulse> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidInput(format!("duration must be positive, got {duration}")));
    }
    let span = grid.n as f64 * grid.step;
    if span < 8.0 * duration {
        return Err(Error::InvalidInput(format!(
            "grid span {span} is shorter than 8 pulse durations ({})",
            8.0 * duration
        )));
    }
    let env = grid
        .points()
        .iter()
        .map(|t| Complex64::new(amplitude * (-t * t / (2.0 * duration * duration)).exp(), 0.0))
        .collect();
    Pulse::new(grid, env)
}

/// Gaussian pulse specified by its spectral HWe^-1M width.
pub fn gaussian_pulse_with_bandwidth(width: f64, amplitude: f64, grid: Grid) -> Result<Pulse> {
    if !(width > 0.0) {
        return Err(Error::InvalidInput(format!("spectral width must be positive, got {width}")));
    }
    gaussian_pulse(1.0 / width, amplitude, grid)
}

/// Half width at `1/e` of the maximum of `|a~|^2`.
pub fn spectral_width_hwem(pulse: &Pulse) -> Result<f64> {
    let spec = pulse.spectrum()?;
    hwem(&pulse.grid.reciprocal().points(), &spec)
}

/// Envelope reversed about the grid center (`t -> -t`).
pub fn time_reverse(pulse: &Pulse) -> Pulse {
    let n = pulse.grid.n;
    let env = (0..n).map(|k| pulse.envelope[pulse.grid.mirror_index(k)]).collect();
    Pulse { grid: pulse.grid, envelope: env, carrier_detuning: pulse.carrier_detuning }
}

/// `E_echo / E_input`.
pub fn energy_efficiency(input: &Pulse, echo: &Pulse) -> Result<f64> {
    if input.grid != echo.grid {
        return Err(Error::GridMismatch("input and echo must share a grid".into()));
    }
    let e_in = input.energy();
    if e_in == 0.0 {
        return Err(Error::InvalidInput("input pulse has zero energy".into()));
    }
    Ok(echo.energy() / e_in)
}

fn rms_width(x: &[f64], v: &[Complex64]) -> f64 {
    let w: Vec<f64> = v.iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let mean = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / total;
    let var = x.iter().zip(&w).map(|(a, b)| (a - mean).powi(2) * b).sum::<f64>() / total;
    var.sqrt()
}

/// Half width at `1/e` of max `|v|^2`, with log-linear interpolation between
/// samples. Fails if the profile rises above the threshold again past a crossing.
fn hwem(x: &[f64], v: &[Complex64]) -> Result<f64> {
    let p: Vec<f64> = v.iter().map(|c| c.norm_sqr()).collect();
    let (imax, &pmax) = p
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::InvalidInput("empty profile".into()))?;
    if pmax == 0.0 {
        return Err(Error::InvalidInput("profile is identically zero".into()));
    }
    let level = pmax * (-1f64).exp();
    let crossing = |from: usize, to: usize| -> f64 {
        let (p0, p1) = (p[from], p[to]);
        let frac = if p0 > 0.0 && p1 > 0.0 {
            (p0.ln() - level.ln()) / (p0.ln() - p1.ln())
        } else {
            (p0 - level) / (p0 - p1)
        };
        x[from] + frac * (x[to] - x[from])
    };

    let mut right = None;
    for k in imax..p.len() - 1 {
        if p[k + 1] < level {
            right = Some((crossing(k, k + 1), k + 1));
            break;
        }
    }
    let mut left = None;
    for k in (1..=imax).rev() {
        if p[k - 1] < level {
            left = Some((crossing(k, k - 1), k - 1));
            break;
        }
    }
    let (Some((xr, kr)), Some((xl, kl))) = (right, left) else {
        return Err(Error::InvalidInput("profile does not fall below 1/e within the grid".into()));
    };
    if p[kr..].iter().any(|&q| q >= level) || p[..=kl].iter().any(|&q| q >= level) {
        return Err(Error::InvalidInput("multi-lobed profile: 1/e width is ambiguous".into()));
    }
    Ok(0.5 * (xr - xl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(1024, 0.05).unwrap()
    }

    #[test]
    fn gaussian_energy() {
        let p = gaussian_pulse(1.3, 1.0, grid()).unwrap();
        assert_relative_eq!(p.energy(), 1.3 * PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn span_requirement() {
        let g = Grid::new(64, 0.1).unwrap();
        assert!(gaussian_pulse(1.0, 1.0, g).is_err());
        assert!(gaussian_pulse(0.8, 1.0, g).is_ok());
    }

    #[test]
    fn spectral_width_of_gaussian() {
        for w in [0.7, 1.5] {
            let g = Grid::new(4096, 0.02).unwrap();
            let p = gaussian_pulse_with_bandwidth(w, 1.0, g).unwrap();
            let got = spectral_width_hwem(&p).unwrap();
            assert!((got - w).abs() < 0.01 * w, "{got} vs {w}");
        }
    }

    #[test]
    fn duration_of_gaussian() {
        let p = gaussian_pulse(2.0, 1.0, grid()).unwrap();
        assert_relative_eq!(p.duration_hwem().unwrap(), 2.0, max_relative = 1e-9);
        assert_relative_eq!(p.rms_duration(), 2.0 / 2f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn width_invariant_under_shift() {
        let g = grid();
        let env: Vec<Complex64> =
            g.points().iter().map(|t| Complex64::new((-(t - 3.0) * (t - 3.0) / 2.0).exp(), 0.0)).collect();
        let shifted = Pulse::new(g, env).unwrap();
        let centered = gaussian_pulse(1.0, 1.0, g).unwrap();
        assert_relative_eq!(
            spectral_width_hwem(&shifted).unwrap(),
            spectral_width_hwem(&centered).unwrap(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn multi_lobed_spectrum_is_ambiguous() {
        let g = grid();
        // Two well-separated pulses produce a fringed spectrum.
        let env: Vec<Complex64> = g
            .points()
            .iter()
            .map(|t| Complex64::new((-(t - 8.0).powi(2)).exp() + (-(t + 8.0).powi(2)).exp(), 0.0))
            .collect();
        let p = Pulse::new(g, env).unwrap();
        assert!(spectral_width_hwem(&p).is_err());
    }

    #[test]
    fn reverse_is_involution_and_preserves_energy() {
        let g = grid();
        let env: Vec<Complex64> = g.points().iter().map(|t| Complex64::from_polar((-(t - 1.0).powi(2)).exp(), *t)).collect();
        let p = Pulse::new(g, env).unwrap();
        let r = time_reverse(&p);
        assert_eq!(time_reverse(&r), p);
        assert_relative_eq!(r.energy(), p.energy(), max_relative = 1e-14);
    }

    #[test]
    fn reversal_reflects_spectrum() {
        let g = grid();
        let env: Vec<Complex64> =
            g.points().iter().map(|t| Complex64::from_polar((-(t - 1.0).powi(2)).exp(), 0.4 * t)).collect();
        let p = Pulse::new(g, env).unwrap();
        let s = p.spectrum().unwrap();
        let sr = time_reverse(&p).spectrum().unwrap();
        for m in 0..g.n {
            assert!((sr[m] - s[g.mirror_index(m)]).norm() < 1e-12);
        }
    }

    #[test]
    fn efficiency_basics() {
        let p = gaussian_pulse(1.0, 1.0, grid()).unwrap();
        assert_eq!(energy_efficiency(&p, &p).unwrap(), 1.0);
        let half = p.scaled(Complex64::new(0.5, 0.0));
        assert_relative_eq!(energy_efficiency(&p, &half).unwrap(), 0.25, max_relative = 1e-15);
        let zero = p.scaled(Complex64::new(0.0, 0.0));
        assert!(energy_efficiency(&zero, &p).is_err());
    }

    #[test]
    fn parseval() {
        let p = gaussian_pulse(0.9, 2.0, grid()).unwrap();
        assert_relative_eq!(p.energy(), p.spectral_energy().unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn csv_roundtrip() {
        let p = gaussian_pulse(0.5, 1.0, Grid::new(16, 0.5).unwrap()).unwrap();
        let back = Pulse::from_csv(&p.to_csv()).unwrap();
        assert_eq!(back.grid.n, 16);
        for (a, b) in back.envelope.iter().zip(&p.envelope) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
