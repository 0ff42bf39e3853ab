//! Atomic frequency comb: dephasing factor, forward/backward transfer,
//! susceptibility of a comb carved into a Gaussian line, and the dispersion
//! factor that limits backward retrieval.
//!
//! Frequencies are in units of the host width `delta_in`. For dispersion work
//! the susceptibility is normalized so the bare Gaussian line has
//! `chi''(0) = -1`; inside the comb window `|w| < delta0 / 2` the absorption is
//! reduced by `1 / f`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure_finite, Error, Result};
use crate::model::{InhomogeneousLine, LineShape, ZETA};
use crate::oracle::quadrature::{integrate_semi_infinite, SemiInfiniteMap, Tail};
use crate::oracle::special::scaled_erfi;

/// Comb geometry plus host line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AfcComb {
    /// Tooth spacing.
    pub delta_afc: f64,
    /// Tooth width.
    pub upsilon: f64,
    /// `delta_afc / upsilon`.
    pub finesse: f64,
    /// Width of the comb window.
    pub delta0: f64,
    pub host: InhomogeneousLine,
    /// Resonant depth `alpha_R(0) L` of the bare host line.
    pub depth: f64,
}

impl AfcComb {
    pub fn new(delta_afc: f64, upsilon: f64, delta0: f64, host: InhomogeneousLine, depth: f64) -> Result<Self> {
        if !(upsilon > 0.0) {
            return Err(Error::InvalidInput(format!("tooth width must be positive, got {upsilon}")));
        }
        let comb = Self { delta_afc, upsilon, finesse: delta_afc / upsilon, delta0, host, depth };
        comb.validate()?;
        Ok(comb)
    }

    /// Comb of given finesse; spacing defaults to a tenth of the host width.
    pub fn with_finesse(finesse: f64, delta0: f64, host: InhomogeneousLine, depth: f64) -> Result<Self> {
        if !(finesse > 0.0) {
            return Err(Error::InvalidInput(format!("finesse must be positive, got {finesse}")));
        }
        let delta_afc = 0.1 * host.delta_in;
        let comb = Self { delta_afc, upsilon: delta_afc / finesse, finesse, delta0, host, depth };
        comb.validate()?;
        Ok(comb)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta_afc", self.delta_afc),
            ("upsilon", self.upsilon),
            ("finesse", self.finesse),
            ("delta0", self.delta0),
            ("depth", self.depth),
        ] {
            ensure_finite(name, v)?;
        }
        self.host.validate()?;
        if !(self.finesse > 1.0) {
            return Err(Error::InvalidInput(format!("finesse must exceed 1, got {}", self.finesse)));
        }
        if (self.finesse - self.delta_afc / self.upsilon).abs() > 1e-12 * self.finesse {
            return Err(Error::InvalidInput("finesse must equal delta_afc / upsilon".into()));
        }
        if !(self.delta0 > 0.0) {
            return Err(Error::InvalidInput(format!("delta0 must be positive, got {}", self.delta0)));
        }
        if self.depth < 0.0 {
            return Err(Error::InvalidInput(format!("depth must be non-negative, got {}", self.depth)));
        }
        Ok(())
    }

    /// Comb-averaged resonant depth `alpha_{R,afc}(0) L = depth / f`.
    pub fn effective_depth(&self) -> f64 {
        self.depth / self.finesse
    }

    /// First rephasing time `2 pi / delta_afc`.
    pub fn storage_time(&self) -> f64 {
        2.0 * PI / self.delta_afc
    }

    fn require_lorentzian(&self) -> Result<()> {
        if self.host.shape != LineShape::Lorentzian {
            return Err(Error::InvalidInput("this transfer function assumes a Lorentzian host".into()));
        }
        Ok(())
    }

    fn require_gaussian(&self) -> Result<()> {
        if self.host.shape != LineShape::Gaussian {
            return Err(Error::InvalidInput("dispersion analysis assumes a Gaussian host".into()));
        }
        Ok(())
    }

    /// `|w| / delta_in < delta0 / (2 delta_in)`
    pub fn in_window(&self, omega: f64) -> bool {
        omega.abs() < 0.5 * self.delta0
    }
}

/// `exp(z) - 1` without cancellation for small `|z|`.
fn exp_m1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

/// Comb dephasing `exp(-7 / (2 f^2))`.
pub fn afc_dephasing(finesse: f64) -> Result<f64> {
    ensure_finite("finesse", finesse)?;
    if !(finesse > 0.0) {
        return Err(Error::InvalidInput(format!("finesse must be positive, got {finesse}")));
    }
    Ok((-7.0 / (2.0 * finesse * finesse)).exp())
}

/// `alpha_{R,afc}(w) z` and `alpha_afc(w) z = alpha_{R,afc}(w) z (1 + i w)` on a Lorentzian host.
fn comb_exponents(comb: &AfcComb, omega: f64, z: f64) -> (f64, Complex64) {
    let w = omega / comb.host.delta_in;
    let xr = comb.effective_depth() * z / (1.0 + w * w);
    (xr, Complex64::new(xr, xr * w))
}

/// Forward AFC echo at propagation length `z` (in units of the sample length):
/// `Gamma_afc alpha_{R,afc}(w) z exp(-alpha_afc(w) z / 2)`. Not time-reversing.
pub fn afc_forward_transfer(comb: &AfcComb, omega: f64, z: f64) -> Result<Complex64> {
    comb.validate()?;
    comb.require_lorentzian()?;
    ensure_finite("omega", omega)?;
    ensure_finite("z", z)?;
    if z < 0.0 {
        return Err(Error::InvalidInput(format!("z must be non-negative, got {z}")));
    }
    let g = afc_dephasing(comb.finesse)?;
    let (xr, xc) = comb_exponents(comb, omega, z);
    Ok(g * xr * (-0.5 * xc).exp())
}

/// Backward AFC echo for the full sample:
/// `Gamma_afc (1 - i w) / (1 + w^2) (1 - exp(-alpha_afc(w) L))`.
pub fn afc_backward_transfer(comb: &AfcComb, omega: f64) -> Result<Complex64> {
    comb.validate()?;
    comb.require_lorentzian()?;
    ensure_finite("omega", omega)?;
    let g = afc_dephasing(comb.finesse)?;
    let w = omega / comb.host.delta_in;
    let (_, xc) = comb_exponents(comb, omega, 1.0);
    let ratio = Complex64::new(1.0, -w) / (1.0 + w * w);
    Ok(g * ratio * -exp_m1(-xc))
}

/// Deep-sample limit of [`afc_backward_transfer`].
pub fn afc_backward_deep_limit(comb: &AfcComb, omega: f64) -> Result<Complex64> {
    let g = afc_dephasing(comb.finesse)?;
    let w = omega / comb.host.delta_in;
    Ok(g * Complex64::new(1.0, -w) / (1.0 + w * w))
}

/// Terms of the in-window susceptibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionDecomposition {
    /// Comb term over the whole host line, scaled by `1 / f`.
    pub chi0: Complex64,
    /// Dispersion of the untouched left wing.
    pub chi1: f64,
    /// Dispersion of the untouched right wing.
    pub chi2: f64,
    pub zeta: f64,
}

impl DispersionDecomposition {
    pub fn total(&self) -> Complex64 {
        self.chi0 + self.chi1 + self.chi2
    }
}

/// Comb term: `chi'_0 = (1/f) exp(-zeta w^2) erfi(sqrt(zeta) w)`, `chi''_0 = -(1/f) exp(-zeta w^2)`.
pub fn chi_comb(omega: f64, comb: &AfcComb) -> Result<Complex64> {
    comb.validate()?;
    comb.require_gaussian()?;
    ensure_finite("omega", omega)?;
    let w = omega / comb.host.delta_in;
    let inv_f = 1.0 / comb.finesse;
    Ok(Complex64::new(inv_f * scaled_erfi(ZETA.sqrt() * w), -inv_f * (-ZETA * w * w).exp()))
}

/// One wing's dispersion, `(1 - 1/f) / pi * int exp(-zeta x^2) / (w - x) dx`
/// over `x >= a` (right) or `x <= -a` (left), `a = delta0 / 2`.
fn wing(w: f64, a: f64, finesse: f64, tail: Tail, map: SemiInfiniteMap, tol: f64) -> Result<f64> {
    let start = match tail {
        Tail::Upper => a,
        Tail::Lower => -a,
    };
    let r = integrate_semi_infinite(|x: f64| (-ZETA * x * x).exp() / (w - x), start, tail, map, 0.5, tol)?;
    Ok((1.0 - 1.0 / finesse) / PI * r.value)
}

const WING_TOL: f64 = 1e-12;

/// Wing dispersion `(chi'_1, chi'_2)` inside the comb window.
pub fn chi_wings(omega: f64, comb: &AfcComb) -> Result<(f64, f64)> {
    chi_wings_with(omega, comb, SemiInfiniteMap::Tanh)
}

/// [`chi_wings`] with an explicit change of variables for the half-line integrals.
pub fn chi_wings_with(omega: f64, comb: &AfcComb, map: SemiInfiniteMap) -> Result<(f64, f64)> {
    comb.validate()?;
    comb.require_gaussian()?;
    ensure_finite("omega", omega)?;
    if !comb.in_window(omega) {
        return Err(Error::Domain(format!(
            "omega = {omega} lies outside the comb window |omega| < {}",
            0.5 * comb.delta0
        )));
    }
    let w = omega / comb.host.delta_in;
    let a = 0.5 * comb.delta0 / comb.host.delta_in;
    Ok((
        wing(w, a, comb.finesse, Tail::Lower, map, WING_TOL)?,
        wing(w, a, comb.finesse, Tail::Upper, map, WING_TOL)?,
    ))
}

pub fn decompose(omega: f64, comb: &AfcComb) -> Result<DispersionDecomposition> {
    let chi0 = chi_comb(omega, comb)?;
    let (chi1, chi2) = chi_wings(omega, comb)?;
    Ok(DispersionDecomposition { chi0, chi1, chi2, zeta: ZETA })
}

/// `chi' + i chi''` inside the window.
pub fn chi_total(omega: f64, comb: &AfcComb) -> Result<Complex64> {
    Ok(decompose(omega, comb)?.total())
}

/// Dispersion factor
/// `D(w) = (1 - exp(-i d chi)) / (1 - i chi' / chi'')`, `d = alpha_R(0) L`.
///
/// The exponent sign is the one that attenuates (`chi'' < 0`).
pub fn afc_dispersion_factor(omega: f64, comb: &AfcComb) -> Result<Complex64> {
    let chi = chi_total(omega, comb)?;
    if chi.im == 0.0 {
        return Err(Error::Singular(format!("chi'' vanishes at omega = {omega}")));
    }
    let i = Complex64::new(0.0, 1.0);
    let num = -exp_m1(-i * comb.depth * chi);
    let den = Complex64::new(1.0, -chi.re / chi.im);
    Ok(num / den)
}

/// Backward-AFC echo amplitude including dispersion, `Gamma_afc D(w)`.
pub fn afc_dispersion_transfer(omega: f64, comb: &AfcComb) -> Result<Complex64> {
    Ok(afc_dephasing(comb.finesse)? * afc_dispersion_factor(omega, comb)?)
}

/// `|Gamma_afc D(w)|^2`
pub fn afc_dispersion_efficiency(omega: f64, comb: &AfcComb) -> Result<f64> {
    Ok(afc_dispersion_transfer(omega, comb)?.norm_sqr())
}

/// Largest symmetric interval `|w| < w_p` (within the window) on which
/// `|chi'(w)| < rel_tol |chi''(0)|`, scanned at resolution `step`.
pub fn plateau_half_width(comb: &AfcComb, rel_tol: f64, step: f64) -> Result<f64> {
    let limit = rel_tol * chi_total(0.0, comb)?.im.abs();
    let mut w = 0.0;
    loop {
        let next = w + step;
        if !comb.in_window(next) || chi_total(next, comb)?.re.abs() >= limit {
            return Ok(w);
        }
        w = next;
    }
}

/// Minimum efficiency over `|w| <= half_band` and where it occurs.
///
/// The efficiency is even in `w`, so `[0, half_band]` is sampled and the
/// smallest sample is polished by golden section on its neighbors.
pub fn worst_case_efficiency(comb: &AfcComb, half_band: f64, samples: usize) -> Result<(f64, f64)> {
    let n = samples.max(2);
    let ws: Vec<f64> = (0..=n).map(|k| half_band * k as f64 / n as f64).collect();
    let etas = ws.iter().map(|&w| afc_dispersion_efficiency(w, comb)).collect::<Result<Vec<_>>>()?;
    let (k, &eta_k) = etas.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    if k == 0 || k == n {
        return Ok((ws[k], eta_k));
    }
    let neg = |w: f64| -afc_dispersion_efficiency(w, comb).unwrap_or(f64::NAN);
    match crate::oracle::optimize::maximize_1d(neg, (ws[k - 1], ws[k + 1]), 1e-9) {
        Ok(m) if -m.value <= eta_k => Ok((m.x, -m.value)),
        _ => Ok((ws[k], eta_k)),
    }
}

/// Mean efficiency over `|w| <= half_band` (trapezoid on `[0, half_band]`).
pub fn mean_efficiency(comb: &AfcComb, half_band: f64, samples: usize) -> Result<f64> {
    let n = samples.max(2);
    let h = half_band / n as f64;
    let mut acc = 0.0;
    for k in 0..=n {
        let e = afc_dispersion_efficiency(k as f64 * h, comb)?;
        acc += if k == 0 || k == n { 0.5 * e } else { e };
    }
    Ok(acc / n as f64)
}

/// Inclusive parameter range; `lo == hi` fixes the parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let r = Self { lo, hi };
        r.validate()?;
        Ok(r)
    }

    pub fn fixed(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::InvalidInput(format!("invalid range [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }

    fn degenerate(&self) -> bool {
        self.lo == self.hi
    }

    fn points(&self, n: usize) -> Vec<f64> {
        if self.degenerate() || n < 2 {
            return vec![self.lo];
        }
        (0..n).map(|k| self.lo + (self.hi - self.lo) * k as f64 / (n - 1) as f64).collect()
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSearch {
    /// Operating bandwidth `delta_QM`; the band is `|w| <= delta_QM / 2`.
    pub target_bandwidth: f64,
    pub finesse: Range,
    pub delta0: Range,
    pub depth: Range,
    /// Worst-case efficiency a design must reach to count as feasible.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Coarse grid points per free parameter.
    #[serde(default = "default_coarse")]
    pub coarse_points: usize,
    /// Frequency samples across the half band.
    #[serde(default = "default_band_samples")]
    pub band_samples: usize,
}

fn default_threshold() -> f64 {
    0.9
}
fn default_coarse() -> usize {
    9
}
fn default_band_samples() -> usize {
    45
}

impl DesignSearch {
    pub fn new(target_bandwidth: f64, finesse: Range, delta0: Range, depth: Range) -> Self {
        Self {
            target_bandwidth,
            finesse,
            delta0,
            depth,
            threshold: default_threshold(),
            coarse_points: default_coarse(),
            band_samples: default_band_samples(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("target_bandwidth", self.target_bandwidth)?;
        if !(self.target_bandwidth > 0.0) {
            return Err(Error::InvalidInput("target bandwidth must be positive".into()));
        }
        self.finesse.validate()?;
        self.delta0.validate()?;
        self.depth.validate()?;
        if self.finesse.lo <= 1.0 || self.delta0.lo <= 0.0 || self.depth.lo < 0.0 {
            return Err(Error::InvalidInput("need finesse > 1, delta0 > 0, depth >= 0".into()));
        }
        Ok(())
    }
}

/// One evaluated design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub finesse: f64,
    pub delta0: f64,
    pub depth: f64,
    pub worst_eta: f64,
    pub worst_omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub feasible: bool,
    pub threshold: f64,
    pub target_bandwidth: f64,
    /// Best design found, whether or not it meets the threshold.
    pub best: DesignPoint,
    pub mean_eta: f64,
    /// `|w| < plateau_half_width`: region where `|chi'| < 0.05 |chi''(0)|`.
    pub plateau_half_width: f64,
    pub evaluations: usize,
}

fn comb_for(finesse: f64, delta0: f64, depth: f64) -> Result<AfcComb> {
    AfcComb::with_finesse(finesse, delta0, InhomogeneousLine::gaussian(1.0), depth)
}

/// Worst-case efficiency over the band; `None` when the band does not fit in the window.
fn score(s: &DesignSearch, finesse: f64, delta0: f64, depth: f64) -> Result<Option<DesignPoint>> {
    let half = 0.5 * s.target_bandwidth;
    if half >= 0.5 * delta0 {
        return Ok(None);
    }
    let comb = comb_for(finesse, delta0, depth)?;
    let (w, eta) = worst_case_efficiency(&comb, half, s.band_samples)?;
    Ok(Some(DesignPoint { finesse, delta0, depth, worst_eta: eta, worst_omega: w }))
}

/// Higher score wins; ties go to smaller delta0, then finesse, then depth.
fn better(a: &DesignPoint, b: &DesignPoint) -> bool {
    if a.worst_eta != b.worst_eta {
        return a.worst_eta > b.worst_eta;
    }
    (a.delta0, a.finesse, a.depth) < (b.delta0, b.finesse, b.depth)
}

/// Maximizes the worst-case backward-AFC efficiency over the operating band.
///
/// A coarse grid over the free parameters is followed by a compass search
/// around the best grid point, halving the step until it falls below 1e-4 of
/// each range. Evaluation order does not affect the result.
pub fn afc_design_search(s: &DesignSearch) -> Result<DesignReport> {
    s.validate()?;
    let fs = s.finesse.points(s.coarse_points);
    let ds = s.delta0.points(s.coarse_points);
    let ks = s.depth.points(s.coarse_points);
    let mut cells = Vec::with_capacity(fs.len() * ds.len() * ks.len());
    for &f in &fs {
        for &d in &ds {
            for &k in &ks {
                cells.push((f, d, k));
            }
        }
    }
    let mut evaluations = cells.len();
    let scored = cells
        .par_iter()
        .map(|&(f, d, k)| score(s, f, d, k))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<DesignPoint> = None;
    for p in scored.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| better(&p, b)) {
            best = Some(p);
        }
    }
    let Some(mut best) = best else {
        return Err(Error::InvalidInput(
            "no candidate window contains the target band (need delta0 > target bandwidth)".into(),
        ));
    };

    let ranges = [s.finesse, s.delta0, s.depth];
    let mut steps: Vec<f64> = ranges.iter().map(|r| 0.5 * (r.hi - r.lo) / (s.coarse_points.max(2) - 1) as f64).collect();
    let floors: Vec<f64> = ranges.iter().map(|r| 1e-4 * (r.hi - r.lo)).collect();
    while steps.iter().zip(&floors).any(|(st, fl)| *st > *fl && *st > 0.0) {
        let mut candidates = Vec::new();
        for dim in 0..3 {
            if ranges[dim].degenerate() || steps[dim] <= floors[dim] {
                continue;
            }
            for sign in [-1.0, 1.0] {
                let mut x = [best.finesse, best.delta0, best.depth];
                x[dim] = ranges[dim].clamp(x[dim] + sign * steps[dim]);
                candidates.push(x);
            }
        }
        evaluations += candidates.len();
        let scored = candidates
            .par_iter()
            .map(|x| score(s, x[0], x[1], x[2]))
            .collect::<Result<Vec<_>>>()?;
        let mut improved = false;
        for p in scored.into_iter().flatten() {
            if better(&p, &best) {
                best = p;
                improved = true;
            }
        }
        if !improved {
            for st in steps.iter_mut() {
                *st *= 0.5;
            }
        }
    }

    let comb = comb_for(best.finesse, best.delta0, best.depth)?;
    let half = 0.5 * s.target_bandwidth;
    Ok(DesignReport {
        feasible: best.worst_eta >= s.threshold,
        threshold: s.threshold,
        target_bandwidth: s.target_bandwidth,
        best,
        mean_eta: mean_efficiency(&comb, half, s.band_samples)?,
        plateau_half_width: plateau_half_width(&comb, 0.05, 1e-3)?,
        evaluations,
    })
}
