//! Discrete form of the continuous transform pair
//!
//! ```text
//! a~(w) = (2 pi)^(-1/2) int a(t) exp(+i w t) dt
//! a(t)  = (2 pi)^(-1/2) int a~(w) exp(-i w t) dw
//! ```
//!
//! on centered uniform grids of even length `N`:
//!
//! ```text
//! t_k = (k - N/2) dt,   w_m = (m - N/2) dw,   dw = 2 pi / (N dt),
//! a~_m = dt / sqrt(2 pi) * sum_k a_k exp(+i w_m t_k)
//! a_k  = dw / sqrt(2 pi) * sum_m a~_m exp(-i w_m t_k)
//! ```
//!
//! Both arrays are stored in ascending order (index 0 is the most negative
//! sample). The pair is an exact inverse up to floating-point rounding.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Forward kernel sign, normalization and grid layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformConvention {
    /// Sign of the exponent in the forward kernel.
    pub sign: i8,
    /// Prefactor of both directions.
    pub normalization: f64,
}

impl Default for TransformConvention {
    fn default() -> Self {
        Self { sign: 1, normalization: 1.0 / (2.0 * PI).sqrt() }
    }
}

/// Uniform centered grid of even length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub step: f64,
}

impl Grid {
    pub fn new(n: usize, step: f64) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("grid length must be even and >= 2, got {n}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidInput(format!("grid step must be positive, got {step}")));
        }
        Ok(Self { n, step })
    }

    pub fn point(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.point(k)).collect()
    }

    /// The reciprocal grid: same length, step `2 pi / (N step)`.
    pub fn reciprocal(&self) -> Grid {
        Grid { n: self.n, step: 2.0 * PI / (self.n as f64 * self.step) }
    }

    /// Index of `-x_k` under periodic wrap; index 0 (the Nyquist sample) maps to itself.
    pub fn mirror_index(&self, k: usize) -> usize {
        (self.n - k) % self.n
    }
}

/// `(-1)^k`
fn alt(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Time samples on `grid` to spectral samples on `grid.reciprocal()`.
pub fn forward(samples: &[Complex64], grid: &Grid) -> Result<Vec<Complex64>> {
    check_len(samples, grid)?;
    let n = grid.n;
    let mut buf: Vec<Complex64> = samples.iter().enumerate().map(|(k, &a)| a * alt(k)).collect();
    // rustfft's inverse direction computes sum_k x_k exp(+2 pi i m k / N).
    FftPlanner::<f64>::new().plan_fft_inverse(n).process(&mut buf);
    let scale = grid.step / (2.0 * PI).sqrt() * alt(n / 2);
    Ok(buf.iter().enumerate().map(|(m, &v)| v * (scale * alt(m))).collect())
}

/// Spectral samples on `grid.reciprocal()` back to time samples on `grid`.
pub fn inverse(spectrum: &[Complex64], grid: &Grid) -> Result<Vec<Complex64>> {
    check_len(spectrum, grid)?;
    let n = grid.n;
    let dw = grid.reciprocal().step;
    let mut buf: Vec<Complex64> = spectrum.iter().enumerate().map(|(m, &a)| a * alt(m)).collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let scale = dw / (2.0 * PI).sqrt() * alt(n / 2);
    Ok(buf.iter().enumerate().map(|(k, &v)| v * (scale * alt(k))).collect())
}

/// Forward then inverse transform; returns the reconstructed samples.
pub fn dft_roundtrip(samples: &[Complex64], grid: &Grid) -> Result<Vec<Complex64>> {
    let spec = forward(samples, grid)?;
    inverse(&spec, grid)
}

/// Fraction of `sum |x|^2` carried by samples with `|index - N/2| >= 3N/8`,
/// i.e. the outer quarter of the grid.
pub fn edge_energy_fraction(values: &[Complex64]) -> f64 {
    let n = values.len();
    let total: f64 = values.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let half = (n / 2) as isize;
    let cut = (3 * n / 8) as isize;
    let edge: f64 = values
        .iter()
        .enumerate()
        .filter(|(k, _)| (*k as isize - half).abs() >= cut)
        .map(|(_, v)| v.norm_sqr())
        .sum();
    edge / total
}

fn check_len(values: &[Complex64], grid: &Grid) -> Result<()> {
    if values.len() != grid.n {
        return Err(Error::GridMismatch(format!(
            "{} samples on a grid of length {}",
            values.len(),
            grid.n
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_maps_to_gaussian() {
        // a(t) = exp(-t^2 / 2)  ->  a~(w) = exp(-w^2 / 2) under the symmetric convention.
        let grid = Grid::new(256, 0.1).unwrap();
        let samples: Vec<Complex64> = grid.points().iter().map(|t| Complex64::new((-t * t / 2.0).exp(), 0.0)).collect();
        let spec = forward(&samples, &grid).unwrap();
        let expect: Vec<Complex64> = grid
            .reciprocal()
            .points()
            .iter()
            .map(|w| Complex64::new((-w * w / 2.0).exp(), 0.0))
            .collect();
        assert!(max_abs_diff(&spec, &expect) < 1e-12);
    }

    #[test]
    fn kernel_sign_is_positive() {
        // A shifted Gaussian a(t - t0) picks up exp(+i w t0).
        let grid = Grid::new(512, 0.05).unwrap();
        let t0 = 1.5;
        let samples: Vec<Complex64> = grid
            .points()
            .iter()
            .map(|t| Complex64::new((-(t - t0) * (t - t0) / 2.0).exp(), 0.0))
            .collect();
        let spec = forward(&samples, &grid).unwrap();
        for (m, w) in grid.reciprocal().points().iter().enumerate() {
            let expect = Complex64::from_polar((-w * w / 2.0).exp(), w * t0);
            assert!((spec[m] - expect).norm() < 1e-10, "w = {w}");
        }
    }

    #[test]
    fn roundtrip_identity() {
        let grid = Grid::new(128, 0.2).unwrap();
        let samples: Vec<Complex64> = grid
            .points()
            .iter()
            .map(|t| Complex64::from_polar((-t * t).exp(), 0.3 * t * t))
            .collect();
        let back = dft_roundtrip(&samples, &grid).unwrap();
        assert!(max_abs_diff(&samples, &back) < 1e-12);
    }

    #[test]
    fn odd_length_rejected() {
        assert!(Grid::new(7, 1.0).is_err());
    }

    #[test]
    fn length_mismatch() {
        let grid = Grid::new(8, 1.0).unwrap();
        assert!(matches!(forward(&[Complex64::new(1.0, 0.0)], &grid), Err(Error::GridMismatch(_))));
    }
}
