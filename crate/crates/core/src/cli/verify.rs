//! Closed forms against independent oracles (RK4, adaptive quadrature,
//! discrete transform), with max residuals.
//!
//! `perturbation` scales every closed-form value by `1 + perturbation`
//! before comparison; a healthy suite must then fail.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::afc::{self, AfcComb};
use crate::area::{self, AreaProtocolConfig, Geometry, PrefactorConvention};
use crate::error::Result;
use crate::linear;
use crate::model::{self, DephasingFactor, InhomogeneousLine, LineShape};
use crate::oracle::area_ode;
use crate::oracle::quadrature::{adaptive_simpson, SemiInfiniteMap};
use crate::oracle::special::scaled_erfi;
use crate::oracle::transform::{dft_roundtrip, Grid};
use crate::pulses;

/// Absolute tolerance for closed-form vs RK4 area comparisons.
pub const AREA_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub cells: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "{} {:<34} residual {:.3e}  tol {:.1e}  cells {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance,
                c.cells
            ));
            if let Some(n) = &c.note {
                s.push_str(&format!("     {n}\n"));
            }
        }
        for n in &self.notes {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Substring filters on check names; empty runs everything.
    pub only: Vec<String>,
    pub perturbation: f64,
    /// Points per axis for the area-theorem grids.
    pub area_grid: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { only: Vec::new(), perturbation: 0.0, area_grid: 20 }
    }
}

type CheckFn = fn(&VerifyOptions) -> Result<(f64, f64, usize)>;

const CATALOGUE: &[(&str, CheckFn)] = &[
    ("area.mccall_hahn", area_mccall_hahn),
    ("area.crib_backward_profile", area_crib_backward_profile),
    ("area.crib_backward_echo", area_crib_backward_echo),
    ("area.crib_forward", area_crib_forward),
    ("area.control_pulses", area_control_pulses),
    ("area.rose", area_rose),
    ("area.rose_formal_quadrature", area_rose_formal),
    ("special.scaled_erfi", special_scaled_erfi),
    ("model.lorentzian_chi_quadrature", model_chi),
    ("transform.roundtrip", transform_roundtrip),
    ("linear.crib_forward_general_line", linear_forward_general),
    ("linear.crib_backward_time_reversal", linear_backward_reversal),
    ("afc.wing_maps", afc_wing_maps),
    ("afc.forward_peak", afc_forward_peak),
];

pub fn check_names() -> Vec<&'static str> {
    CATALOGUE.iter().map(|(n, _)| *n).collect()
}

/// Runs the selected checks. A check that errors is reported as failed.
pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let selected: Vec<&(&str, CheckFn)> = CATALOGUE
        .iter()
        .filter(|(n, _)| opts.only.is_empty() || opts.only.iter().any(|o| selects(o, n)))
        .collect();
    let checks = selected
        .par_iter()
        .map(|(name, f)| match f(opts) {
            Ok((residual, tolerance, cells)) => Check {
                name: name.to_string(),
                residual,
                tolerance,
                cells,
                passed: residual <= tolerance,
                note: note_for(name),
            },
            Err(e) => Check {
                name: name.to_string(),
                residual: f64::NAN,
                tolerance: f64::NAN,
                cells: 0,
                passed: false,
                note: Some(format!("error: {e}")),
            },
        })
        .collect();
    VerifyReport { checks, notes: vec![afc_forward_note()] }
}

fn note_for(name: &str) -> Option<String> {
    match name {
        "area.crib_backward_profile" => {
            Some("inside the medium the echo source uses the distance L - z to the exit face".into())
        }
        "area.rose" | "area.rose_formal_quadrature" => {
            Some("Gamma * theta_s0 prefactor counted once (single convention)".into())
        }
        _ => None,
    }
}

/// The forward-AFC maximum against the percentage quoted in the literature.
pub fn afc_forward_note() -> String {
    let peak = 4.0 * (-2f64).exp();
    let quoted: f64 = 0.52;
    let finesse = (7.0 / -(quoted / peak).ln()).sqrt();
    format!(
        "forward AFC maximum is 4 exp(-2) Gamma_afc^2 = {peak:.4} Gamma_afc^2 at alpha_afc L = 2; \
         the quoted 52% is not this value for an ideal comb (it would correspond to Gamma_afc^2 = {:.4}, \
         i.e. finesse {finesse:.1}); the closed-form value is reported unmodified",
        quoted / peak
    )
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
}

fn bump(v: f64, o: &VerifyOptions) -> f64 {
    v * (1.0 + o.perturbation)
}

/// Input areas and depths shared by the area checks.
fn area_axis(o: &VerifyOptions) -> Vec<f64> {
    linspace(0.0, 0.95 * PI, o.area_grid)
}

fn depth_axis(o: &VerifyOptions, hi: f64) -> Vec<f64> {
    linspace(0.0, hi, o.area_grid)
}

fn cfg(theta_s0: f64, gamma_e: f64, alpha0: f64, length: f64, geometry: Geometry) -> AreaProtocolConfig {
    AreaProtocolConfig { theta_s0, theta_c1: 0.0, theta_c2: 0.0, gamma_e, alpha0, length, geometry }
}

const GAMMA: f64 = 0.9;

fn area_mccall_hahn(o: &VerifyOptions) -> Result<(f64, f64, usize)> {
    let z = depth_axis(o, 10.0);
    let rows = area_axis(o)
        .par_iter()
        .map(|&t0| {
            let p = area_ode::mccall_hahn_profile(t0, 1.0, &z)?;
            let closed = z.iter().map(|&zi| area::mccall_hahn_area(zi, t0, 1.0)).collect::<Result<Vec<_>>>()?;
            Ok(max_abs(closed.iter().zip(&p.theta).map(|(c, n)| bump(*c, o) - n)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((max_abs(rows), AREA_TOL, z.len() * o.area_grid))
}

fn area_crib_backward_profile(o: &VerifyOptions) -> Result<(f64, f64, usize)> {
    let l = 5.0;
    let z = depth_axis(o, l);
    let rows = area_axis(o)
        .par_iter()
        .map(|&ts| {
            let c = cfg(ts, GAMMA, 1.0, l, Geometry::Backward);
            let p = area_ode::crib_backward_profile(ts, GAMMA, 1.0, l, &z)?;
            let closed = z.iter().map(|&zi| area::crib_backward_area(zi, &c)).collect::<Result<Vec<_>>>()?;
            Ok(max_abs(closed.iter().zip(&p.theta).map(|(c, n)| bump(*c, o) - n)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((max_abs(rows), AREA_TOL, z.len() * o.area_grid))
}

fn area_crib_backward_echo(o: &VerifyOptions) -> Result<(f64, f64, usize)> {
    let lengths = depth_axis(o, 10.0);
    let cells: Vec<(f64, f64)> = area_axis(o).iter().flat_map(|&t| lengths.iter().map(move |&l| (t, l))).collect();
    let res = cells
        .par_iter()
        .map(|&(ts, l)| {
            let closed = area::crib_backward_echo_area(&cfg(ts, GAMMA, 1.0, l, Geometry::Backward))?;
            let numeric = area_ode::crib_backward_profile(ts, GAMMA, 1.0, l, &[0.0])?.theta[0];
            Ok(bump(closed, o) - numeric)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((max_abs(res), AREA_TOL, cells.len()))
}

fn area_crib_forward(o: &VerifyOptions) -> Result<(f64, f64, usize)> {
    let z = depth_axis(o, 10.0);
    let rows = area_axis(o)
        .par_iter()
        .map(|&ts| {
            let c = cfg(ts, GAMMA, 1.0, 10.0, Geometry::Forward);
            let p = area_ode::crib_forward_profile(ts, GAMMA, 1.0, &z)?;
            let closed = z.iter().map(|&zi| area::crib_forward_area(zi, &c)).collect::<Result<Vec<_>>>()?;
            Ok(max_abs(closed.iter().zip(&p.theta).map(|(c, n)| bump(*c, o) - n)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((max_abs(rows), AREA_TOL, z.len() * o.area_grid))
}

fn area_control_pulses(o: &VerifyOptions) -> Result<(f64, f64, usize)> {
    let z = depth_axis(o, 10.0);
    let rows = area_axis(o)
        .par_iter()
        .map(|&tc| {
            let (p1, p2) = area_ode::control_profiles(tc, tc, 1.0, &z)?;
            let mut worst: f64 = 0.0;
            for (k, &zi) in z.iter().enumerate() {
                let (c1, c2) = area::control_pulse_areas(zi, tc, tc, 1.0)?;
                worst = worst.max((bump(c1, o) - p1.theta[k]).abs()).max((bump(c2, o) - p2.theta[k]).abs());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((max_abs(rows), AREA_TOL, z.len() * o.area_grid))
}

/// Weak signal, equal control areas.
fn rose_cfg(tc: f64) -> AreaProtocolConfig {
    AreaProtocolConfig {
        theta_s0: 0.1,
        theta_c1: tc,
        theta_c2: tc,
        gamma_e: 1.0,
        alpha0: 1.0,
        length: 10.0,
        geometry: Geometry::Forward,
    }
}

fn area_rose(o: &VerifyOptions) -> Result<(f64, f64, usize)> {
    let z = depth_axis(o, 10.0);
    let controls = linspace(0.05 * PI, 0.95 * PI, o.area_grid);
    let rows = controls
        .par_iter()
        .map(|&tc| {
            let c = rose_cfg(tc);
            let p = area_ode::rose_profile(c.theta_s0, c.gamma_e, tc, tc, 1.0, &z)?;
            let closed = z.iter().map(|&zi| area::rose_closed_form(zi, &c)).collect::<Result<Vec<_>>>()?;
            Ok(max_abs(closed.iter().zip(&p.theta).map(|(c, n)| bump(*c, o) - n)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((max_abs(rows), AREA_TOL, z.len() * controls.len()))
}

fn area_rose_formal(o: &VerifyOptions) -> Result<(f64, f64, usize)> {
    let cells: Vec<(f64, f64)> =
        [0.3 * PI, 0.6 * PI, 0.8 * PI].iter().flat_map(|&t| [0.5, 2.0, 4.0].map(move |z| (t, z))).collect();
    let res = cells
        .par_iter()
        .map(|&(tc, z)| {
            let c = rose_cfg(tc);
            let closed = area::rose_closed_form(z, &c)?;
            Ok(bump(closed, o) - area::rose_formal_solution(z, &c, PrefactorConvention::Single)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((max_abs(res), 1e-9, cells.len()))
}

/// `exp(-x^2) erfi(x) = 2/sqrt(pi) int_0^x exp(t^2 - x^2) dt`, on 100 points in `|x| <= 6`.
pub fn scaled_erfi_residual(perturbation: f64) -> Result<f64> {
    let xs = linspace(-6.0, 6.0, 100);
    let res = xs
        .par_iter()
        .map(|&x| {
            let q = adaptive_simpson(|t: f64| (t * t - x * x).exp(), 0.0, x, 1e-14)?.value;
            let oracle = 2.0 / PI.sqrt() * q;
            Ok(scaled_erfi(x) * (1.0 + perturbation) - oracle)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(max_abs(res))
}

fn special_scaled_erfi(o: &VerifyOptions) -> Result<(f64, f64, usize)> {
    Ok((scaled_erfi_residual(o.perturbation)?, 1e-10, 100))
}

fn model_chi(o: &VerifyOptions) -> Result<(f64, f64, usize)> {
    let line = InhomogeneousLine::new(LineShape::Lorentzian, 1.0, Some(20.0))?;
    let ws = linspace(-3.0, 3.0, 13);
    let res = ws
        .iter()
        .map(|&w| {
            let closed = model::chi(&line, w)? * (1.0 + o.perturbation);
            let quad = model::chi_by_quadrature(|d| line.density(d), 1.0, line.gamma(), w)?;
            Ok((closed - quad).norm() / closed.norm())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((max_abs(res), 1e-6, ws.len()))
}

fn transform_roundtrip(o: &VerifyOptions) -> Result<(f64, f64, usize)> {
    let grid = Grid::new(1024, 0.05)?;
    let samples: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|&t| Complex64::from_polar((-t * t).exp(), 0.3 * t * t))
        .collect();
    let back = dft_roundtrip(&samples, &grid)?;
    let res = max_abs(samples.iter().zip(&back).map(|(a, b)| (a * (1.0 + o.perturbation) - b).norm()));
    Ok((res, 1e-12, grid.n))
}

fn linear_forward_general(o: &VerifyOptions) -> Result<(f64, f64, usize)> {
    let line = InhomogeneousLine::lorentzian(1.0);
    let cells: Vec<(f64, f64)> = [0.5, 2.0, 5.0].iter().flat_map(|&d| [0.1, 0.5, 1.0, 2.0].map(move |w| (d, w))).collect();
    let res = cells
        .iter()
        .map(|&(d, w)| {
            let closed = linear::crib_forward_transfer(d, &line, DephasingFactor::NONE, w)?;
            let general = linear::crib_forward_transfer_general(d, &line, DephasingFactor::NONE, w)?;
            Ok((closed * (1.0 + o.perturbation) - general).norm())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((max_abs(res), 1e-12, cells.len()))
}

fn linear_backward_reversal(o: &VerifyOptions) -> Result<(f64, f64, usize)> {
    let line = InhomogeneousLine::lorentzian(1.0);
    let medium = model::Medium::with_depth(10.0, &line)?;
    let grid = Grid::new(4096, 0.5)?;
    let input = pulses::gaussian_pulse_with_bandwidth(0.02, 1.0, grid)?;
    let tf = linear::TransferFunction::crib_backward(grid.reciprocal(), &medium, &line, DephasingFactor::NONE)?;
    let echo = linear::apply_transfer(&input, &tf)?.echo;
    let h0 = linear::crib_backward_transfer(&medium, &line, DephasingFactor::NONE, 0.0)?.re * (1.0 + o.perturbation);
    let reversed = pulses::time_reverse(&input);
    let res = max_abs(reversed.envelope.iter().zip(&echo.envelope).map(|(a, b)| (a * h0 - b).norm()));
    Ok((res, 1e-6, grid.n))
}

fn afc_wing_maps(o: &VerifyOptions) -> Result<(f64, f64, usize)> {
    let comb = AfcComb::with_finesse(10.0, 1.25, InhomogeneousLine::gaussian(1.0), 80.0)?;
    let ws = linspace(-0.6, 0.6, 13);
    let res = ws
        .iter()
        .map(|&w| {
            let a = afc::chi_wings_with(w, &comb, SemiInfiniteMap::Tanh)?;
            let b = afc::chi_wings_with(w, &comb, SemiInfiniteMap::Rational)?;
            Ok((a.0 * (1.0 + o.perturbation) - b.0).abs().max((a.1 * (1.0 + o.perturbation) - b.1).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((max_abs(res), 1e-8, ws.len()))
}

/// Forward AFC at line center against a golden-section maximum over depth.
fn afc_forward_peak(o: &VerifyOptions) -> Result<(f64, f64, usize)> {
    let f = 10.0;
    let host = InhomogeneousLine::lorentzian(1.0);
    let eta = |eff: f64| -> f64 {
        AfcComb::with_finesse(f, 1.0, host, eff * f)
            .and_then(|c| afc::afc_forward_transfer(&c, 0.0, 1.0))
            .map(|h| h.norm_sqr())
            .unwrap_or(f64::NAN)
    };
    let m = crate::oracle::optimize::maximize_1d(eta, (0.1, 10.0), 1e-12)?;
    let closed = 4.0 * (-2f64).exp() * afc::afc_dephasing(f)?.powi(2) * (1.0 + o.perturbation);
    let misplaced = if (m.x - 2.0).abs() > 1e-4 { f64::INFINITY } else { 0.0 };
    Ok(((closed - m.value).abs().max(misplaced), 1e-9, 1))
}

/// A selector names one check exactly or a whole group (`area`, `afc`, ...).
fn selects(selector: &str, name: &str) -> bool {
    name == selector || (name.starts_with(selector) && name[selector.len()..].starts_with('.'))
}
