//! Command implementations. Each returns the files it wrote and a short
//! human summary; nothing here touches stdout.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};

use super::config::{Protocol, RunConfig, Sweep};
use super::output::{self, num, sha256_hex, Metadata, Table};
use crate::afc::{self, AfcComb};
use crate::area::{self, AreaProtocolConfig, Geometry};
use crate::error::{Error, Result};
use crate::linear::{self, GemConfig, TransferFunction};
use crate::model::{DephasingFactor, InhomogeneousLine, LineShape, Medium};
use crate::oracle::transform::{edge_energy_fraction, Grid};
use crate::pulses::{self, Pulse};

/// Where and how to write.
#[derive(Debug, Clone)]
pub struct Sink {
    pub dir: PathBuf,
    pub svg: bool,
}

/// Result of a command.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// Set when the run completed but the target could not be met.
    pub infeasible: bool,
}

/// Failure modes that map to distinct exit codes.
#[derive(Debug)]
pub enum CommandError {
    Numeric(Error),
    Io(std::io::Error),
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        CommandError::Numeric(e)
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        CommandError::Io(e)
    }
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::Numeric(e) => write!(f, "{e}"),
            CommandError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

type CmdResult = std::result::Result<Outcome, CommandError>;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn line(shape: LineShape) -> InhomogeneousLine {
    InhomogeneousLine::new(shape, 1.0, None).expect("unit line is valid")
}

fn lorentzian_comb(finesse: f64, depth: f64) -> Result<AfcComb> {
    // The window is irrelevant for the Lorentzian-host transfers.
    AfcComb::with_finesse(finesse, 1.0, line(LineShape::Lorentzian), depth)
}

fn gaussian_comb(finesse: f64, delta0: f64, depth: f64) -> Result<AfcComb> {
    AfcComb::with_finesse(finesse, delta0, line(LineShape::Gaussian), depth)
}

/// Spectral response of `protocol`, with its depth replaced by `depth`.
fn response(protocol: &Protocol, depth: f64, omega: f64) -> Result<Complex64> {
    match *protocol {
        Protocol::CribFwd { gamma, line: shape, .. } => {
            linear::crib_forward_transfer(depth, &line(shape), DephasingFactor::new(gamma)?, omega)
        }
        Protocol::CribBwd { gamma, line: shape, .. } => {
            let l = line(shape);
            linear::crib_backward_transfer(&Medium::with_depth(depth, &l)?, &l, DephasingFactor::new(gamma)?, omega)
        }
        Protocol::Gem { gamma, .. } => {
            crate::error::ensure_finite("omega", omega)?;
            Ok(Complex64::new(linear::gem_transfer(depth, DephasingFactor::new(gamma)?)?, 0.0))
        }
        Protocol::AfcFwd { finesse, .. } => afc::afc_forward_transfer(&lorentzian_comb(finesse, depth)?, omega, 1.0),
        Protocol::AfcBwd { finesse, deep_limit, .. } => {
            let comb = lorentzian_comb(finesse, depth)?;
            if deep_limit {
                afc::afc_backward_deep_limit(&comb, omega)
            } else {
                afc::afc_backward_transfer(&comb, omega)
            }
        }
        Protocol::AfcDispersion { finesse, delta0, .. } => {
            afc::afc_dispersion_transfer(omega, &gaussian_comb(finesse, delta0, depth)?)
        }
        Protocol::Rose { .. } => Err(invalid("protocol rose has no spectral response; use map with theta_c/alphaz")),
    }
}

fn protocol_depth(p: &Protocol) -> f64 {
    match *p {
        Protocol::CribFwd { depth, .. }
        | Protocol::CribBwd { depth, .. }
        | Protocol::AfcFwd { depth, .. }
        | Protocol::AfcBwd { depth, .. }
        | Protocol::AfcDispersion { depth, .. } => depth,
        Protocol::Gem { kappa_eff, .. } => kappa_eff,
        Protocol::Rose { .. } => 0.0,
    }
}

/// Transfer function of a configured protocol at offset `omega`.
pub fn protocol_transfer(protocol: &Protocol, omega: f64) -> Result<Complex64> {
    response(protocol, protocol_depth(protocol), omega)
}

/// Echo of `input` and the fraction of input spectral energy near the grid edge.
pub fn protocol_echo(p: &Protocol, input: &Pulse) -> Result<(Pulse, f64)> {
    match *p {
        Protocol::Rose { .. } => Err(invalid("protocol rose has no linear echo; use map")),
        Protocol::Gem { kappa_eff, gamma, chi_grad, t1, t_e, geometry: Geometry::Forward } => {
            let g = GemConfig { kappa_eff, chi_grad, t1, t_e, length: 1.0 };
            let echo = linear::gem_echo(input, &g, DephasingFactor::new(gamma)?)?;
            Ok((echo, edge_energy_fraction(&input.spectrum()?)))
        }
        _ => {
            let depth = protocol_depth(p);
            let tf = TransferFunction::from_fn(input.grid.reciprocal(), reverses_time(p), |w| response(p, depth, w))?;
            let applied = linear::apply_transfer(input, &tf)?;
            Ok((applied.echo, applied.aliasing_fraction))
        }
    }
}

/// Frequency response of a time-reversing protocol multiplies `a~(-w)`.
fn reverses_time(p: &Protocol) -> bool {
    matches!(p, Protocol::CribFwd { .. } | Protocol::CribBwd { .. } | Protocol::Gem { .. })
}

struct Writer<'a> {
    sink: &'a Sink,
    cfg: &'a RunConfig,
    json: String,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(sink: &'a Sink, cfg: &'a RunConfig) -> Self {
        Self { sink, cfg, json: cfg.canonical_json(), files: Vec::new() }
    }

    fn put(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        let p = output::write(&self.sink.dir, name, contents)?;
        self.files.push(p);
        Ok(())
    }

    fn table(&mut self, name: &str, t: &Table) -> std::io::Result<()> {
        let csv = t.to_csv(&self.json);
        self.put(name, &csv)
    }

    fn finish(mut self, command: &str, axes: Vec<(String, usize)>) -> std::io::Result<Vec<PathBuf>> {
        let names = self.files.iter().filter_map(|p| p.file_name()).map(|s| s.to_string_lossy().into_owned()).collect();
        let meta = Metadata {
            command,
            protocol: self.cfg.protocol.name(),
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: sha256_hex(&self.json),
            timestamp_unix: output::timestamp(),
            files: names,
            axes,
        };
        let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        self.put(&format!("{command}_{}.meta.json", self.cfg.protocol.name()), &text)?;
        Ok(self.files)
    }
}

/// Transfer magnitude, phase and efficiency over the frequency grid.
pub fn respond(cfg: &RunConfig, sink: &Sink) -> CmdResult {
    let omega = cfg.axis("omega")?;
    check_cells(cfg, omega.len())?;
    let depth = protocol_depth(&cfg.protocol);
    let values = omega.par_iter().map(|&w| response(&cfg.protocol, depth, w)).collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["omega_over_Din", "re_H", "im_H", "abs_H", "phase_H", "eta"]);
    for (w, h) in omega.iter().zip(&values) {
        t.push(vec![*w, h.re, h.im, h.norm(), h.arg(), h.norm_sqr()]);
    }
    let name = cfg.protocol.name();
    let mut out = Writer::new(sink, cfg);
    out.table(&format!("respond_{name}.csv"), &t)?;
    if sink.svg {
        let eta = t.column("eta").unwrap_or_default();
        let mag = t.column("abs_H").unwrap_or_default();
        let svg = output::line_plot(&format!("{name} response"), "omega / Delta_in", &omega, &[("eta", eta), ("|H|", mag)]);
        out.put(&format!("respond_{name}.svg"), &svg)?;
    }
    let (k, peak) = values
        .iter()
        .map(|h| h.norm_sqr())
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");
    let summary = format!("{name}: {} frequencies, max eta = {} at omega = {}", omega.len(), num(peak), num(omega[k]));
    let files = out.finish("respond", vec![("omega_over_Din".into(), omega.len())])?;
    Ok(Outcome { files, summary, infeasible: false })
}

fn check_cells(cfg: &RunConfig, cells: usize) -> Result<()> {
    if cells > cfg.max_cells {
        return Err(invalid(format!(
            "grid has {cells} cells, above the cap of {}; coarsen the grids or raise max_cells in the config",
            cfg.max_cells
        )));
    }
    Ok(())
}

/// Row-major 2-D map.
struct Map {
    row_name: &'static str,
    col_name: &'static str,
    value_name: &'static str,
    rows: Vec<f64>,
    cols: Vec<f64>,
    values: Vec<Vec<f64>>,
}

fn sweep_map(cfg: &RunConfig) -> Result<Map> {
    let p = &cfg.protocol;
    let sweep = cfg.sweep();
    let mismatch = || invalid(format!("sweep {sweep:?} is not available for protocol {}", p.name()));
    let axes = match sweep {
        Sweep::DepthOmega => ("depth", "omega"),
        Sweep::DepthThetaS => ("depth", "theta_s"),
        Sweep::Delta0Omega => ("delta0", "omega"),
        Sweep::ThetaCAlphaz => ("theta_c", "alphaz"),
    };
    let rows = cfg.axis(axes.0)?;
    let cols = cfg.axis(axes.1)?;
    let cells = rows.len().saturating_mul(cols.len());
    check_cells(cfg, cells)?;

    let grid = |f: &(dyn Fn(f64, f64) -> Result<f64> + Sync)| -> Result<Vec<Vec<f64>>> {
        rows.par_iter().map(|&r| cols.iter().map(|&c| f(r, c)).collect()).collect()
    };
    let (row_name, col_name, value_name, values) = match (sweep, p) {
        (Sweep::DepthOmega, Protocol::Rose { .. }) => return Err(mismatch()),
        (Sweep::DepthOmega, _) => {
            let row = if matches!(p, Protocol::Gem { .. }) { "kappa_eff" } else { "alphaL" };
            (row, "omega_over_Din", "eta", grid(&|d, w| Ok(response(p, d, w)?.norm_sqr()))?)
        }
        (Sweep::DepthThetaS, Protocol::CribFwd { gamma, .. } | Protocol::CribBwd { gamma, .. }) => {
            if cols.iter().any(|&t| t <= 0.0) {
                return Err(invalid("grids.theta_s: area efficiency needs positive input areas"));
            }
            let geometry = if matches!(p, Protocol::CribFwd { .. }) { Geometry::Forward } else { Geometry::Backward };
            let gamma = *gamma;
            let v = grid(&|d, ts| {
                let c = AreaProtocolConfig {
                    theta_s0: ts,
                    theta_c1: 0.0,
                    theta_c2: 0.0,
                    gamma_e: gamma,
                    alpha0: d,
                    length: 1.0,
                    geometry,
                };
                let te = match geometry {
                    Geometry::Forward => area::crib_forward_area(1.0, &c)?,
                    Geometry::Backward => area::crib_backward_echo_area(&c)?,
                };
                Ok(area::efficiency_measures(te, ts)?.eta_theta)
            })?;
            ("alphaL", "theta_s0", "eta_theta", v)
        }
        (Sweep::Delta0Omega, Protocol::AfcDispersion { finesse, depth, .. }) => {
            let (f, d) = (*finesse, *depth);
            let v = grid(&|d0, w| afc::afc_dispersion_efficiency(w, &gaussian_comb(f, d0, d)?))?;
            ("delta0_over_Din", "omega_over_Din", "eta", v)
        }
        (Sweep::ThetaCAlphaz, Protocol::Rose { theta_s0, gamma }) => {
            let c = AreaProtocolConfig {
                theta_s0: *theta_s0,
                theta_c1: 0.0,
                theta_c2: 0.0,
                gamma_e: *gamma,
                alpha0: 1.0,
                length: 1.0,
                geometry: Geometry::Forward,
            };
            ("theta_c", "alphaz", "eta_theta", area::rose_gain_map(&rows, &cols, &c)?.eta)
        }
        _ => return Err(mismatch()),
    };
    Ok(Map { row_name, col_name, value_name, rows, cols, values })
}

/// 2-D sweep written in long form, rows outer and columns inner.
pub fn map(cfg: &RunConfig, sink: &Sink) -> CmdResult {
    let m = sweep_map(cfg)?;
    let mut t = Table::new(&[m.row_name, m.col_name, m.value_name]);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for (r, row) in m.rows.iter().zip(&m.values) {
        for (c, v) in m.cols.iter().zip(row) {
            t.push(vec![*r, *c, *v]);
            if *v > best.0 {
                best = (*v, *r, *c);
            }
        }
    }
    let name = cfg.protocol.name();
    let mut out = Writer::new(sink, cfg);
    out.table(&format!("map_{name}.csv"), &t)?;
    if sink.svg {
        let svg = output::heatmap(&format!("{name}: {}", m.value_name), m.col_name, m.row_name, &m.cols, &m.rows, &m.values);
        out.put(&format!("map_{name}.svg"), &svg)?;
    }
    let summary = format!(
        "{name}: {}x{} map, max {} = {} at {} = {}, {} = {}",
        m.rows.len(),
        m.cols.len(),
        m.value_name,
        num(best.0),
        m.row_name,
        num(best.1),
        m.col_name,
        num(best.2)
    );
    let files = out.finish("map", vec![(m.row_name.into(), m.rows.len()), (m.col_name.into(), m.cols.len())])?;
    Ok(Outcome { files, summary, infeasible: false })
}

#[derive(Debug, Serialize)]
struct EchoSummary {
    config_sha256: String,
    efficiency: f64,
    input_energy: f64,
    echo_energy: f64,
    input_duration_rms: f64,
    echo_duration_rms: f64,
    input_bandwidth_hwem: f64,
    aliasing_fraction: f64,
    aliasing_warning: bool,
}

fn pulse_csv(p: &Pulse, json: &str) -> String {
    format!("# config: {json}\n# config_sha256: {}\n{}", sha256_hex(json), p.to_csv())
}

/// Storage and retrieval of a Gaussian pulse.
pub fn echo(cfg: &RunConfig, sink: &Sink, strict: bool) -> CmdResult {
    let spec = cfg.pulse.as_ref().ok_or_else(|| invalid("pulse: required by echo"))?;
    let grid = Grid::new(spec.samples, spec.dt)?;
    check_cells(cfg, grid.n)?;
    let input = pulses::gaussian_pulse_with_bandwidth(spec.bandwidth, spec.amplitude, grid)?;
    let p = &cfg.protocol;
    let (echo, fraction) = protocol_echo(p, &input)?;
    if strict && fraction > linear::ALIASING_THRESHOLD {
        return Err(Error::Aliasing { fraction }.into());
    }
    let mut out = Writer::new(sink, cfg);
    let name = p.name();
    let summary = EchoSummary {
        config_sha256: sha256_hex(&out.json),
        efficiency: pulses::energy_efficiency(&input, &echo)?,
        input_energy: input.energy(),
        echo_energy: echo.energy(),
        input_duration_rms: input.rms_duration(),
        echo_duration_rms: echo.rms_duration(),
        input_bandwidth_hwem: pulses::spectral_width_hwem(&input)?,
        aliasing_fraction: fraction,
        aliasing_warning: fraction > linear::ALIASING_THRESHOLD,
    };
    let json = out.json.clone();
    out.put(&format!("echo_{name}_input.csv"), &pulse_csv(&input, &json))?;
    out.put(&format!("echo_{name}_output.csv"), &pulse_csv(&echo, &json))?;
    out.put(&format!("echo_{name}_summary.json"), &serde_json::to_string_pretty(&summary).expect("serializes"))?;
    if sink.svg {
        let t = input.times();
        let a: Vec<f64> = input.envelope.iter().map(|v| v.norm()).collect();
        let e: Vec<f64> = echo.envelope.iter().map(|v| v.norm()).collect();
        out.put(&format!("echo_{name}.svg"), &output::line_plot(&format!("{name} echo"), "t", &t, &[("|input|", a), ("|echo|", e)]))?;
    }
    let mut text = format!(
        "{name}: efficiency {}, duration (rms) {} -> {}",
        num(summary.efficiency),
        num(summary.input_duration_rms),
        num(summary.echo_duration_rms)
    );
    if summary.aliasing_warning {
        text.push_str(&format!("\nwarning: {:.3e} of the input spectrum lies near the grid edge", fraction));
    }
    let files = out.finish("echo", vec![("t".into(), grid.n)])?;
    Ok(Outcome { files, summary: text, infeasible: false })
}

#[derive(Debug, Serialize)]
struct DesignOutput<'a> {
    config_sha256: String,
    report: &'a afc::DesignReport,
}

/// Comb design search; infeasible targets still produce a report.
pub fn afc_design(cfg: &RunConfig, sink: &Sink) -> CmdResult {
    let search = cfg.design.as_ref().ok_or_else(|| invalid("design: required by afc-design"))?;
    let report = afc::afc_design_search(search)?;
    let b = report.best;
    let comb = gaussian_comb(b.finesse, b.delta0, b.depth)?;
    let n = 201;
    let half = 0.5 * b.delta0 * (1.0 - 1e-6);
    let omegas: Vec<f64> = (0..n).map(|k| -half + 2.0 * half * k as f64 / (n - 1) as f64).collect();
    let rows = omegas
        .par_iter()
        .map(|&w| {
            let chi = afc::chi_total(w, &comb)?;
            Ok(vec![w, chi.re, chi.im, afc::afc_dispersion_efficiency(w, &comb)?])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["omega_over_Din", "chi_re", "chi_im", "eta"]);
    rows.into_iter().for_each(|r| t.push(r));

    let mut out = Writer::new(sink, cfg);
    let doc = DesignOutput { config_sha256: sha256_hex(&out.json), report: &report };
    out.put("afc_design_report.json", &serde_json::to_string_pretty(&doc).expect("serializes"))?;
    out.table("afc_design_dispersion.csv", &t)?;
    if sink.svg {
        let chi_re = t.column("chi_re").unwrap_or_default();
        let eta = t.column("eta").unwrap_or_default();
        out.put(
            "afc_design_dispersion.svg",
            &output::line_plot("best comb", "omega / Delta_in", &omegas, &[("eta", eta), ("chi'", chi_re)]),
        )?;
    }
    let summary = format!(
        "{}: finesse {}, delta0 {}, depth {}, worst-case eta {} (threshold {}) at omega {}",
        if report.feasible { "feasible" } else { "infeasible" },
        num(b.finesse),
        num(b.delta0),
        num(b.depth),
        num(b.worst_eta),
        num(report.threshold),
        num(b.worst_omega)
    );
    let files = out.finish("afc-design", vec![("omega_over_Din".into(), n)])?;
    Ok(Outcome { files, summary, infeasible: !report.feasible })
}

/// Output directory: explicit flag, then `ECHOMEM_OUT`, then the config, then `.`.
pub fn resolve_dir(flag: Option<&Path>, env: Option<&str>, cfg: &RunConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(e) = env.filter(|e| !e.is_empty()) {
        return PathBuf::from(e);
    }
    cfg.output.dir.as_ref().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}
