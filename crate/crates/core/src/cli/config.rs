//! Run configuration: one JSON document per invocation.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::afc::{AfcComb, DesignSearch};
use crate::area::{AreaProtocolConfig, Geometry};
use crate::error::{Error, Result};
use crate::model::{DephasingFactor, InhomogeneousLine, LineShape};

/// Default ceiling on the number of cells in one sweep.
pub const DEFAULT_MAX_CELLS: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: Protocol,
    #[serde(default)]
    pub grids: Grids,
    /// Which pair of axes `map` sweeps. Defaults per protocol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    /// Input pulse for `echo`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseSpec>,
    /// Search space for `afc-design`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSearch>,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
    /// Not part of the embedded config; outputs do not depend on it.
    #[serde(default, skip_serializing)]
    pub output: OutputSpec,
}

fn default_max_cells() -> usize {
    DEFAULT_MAX_CELLS
}

fn one() -> f64 {
    1.0
}

fn default_line() -> LineShape {
    LineShape::Lorentzian
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Protocol {
    CribFwd {
        depth: f64,
        #[serde(default = "one")]
        gamma: f64,
        #[serde(default = "default_line")]
        line: LineShape,
    },
    CribBwd {
        depth: f64,
        #[serde(default = "one")]
        gamma: f64,
        #[serde(default = "default_line")]
        line: LineShape,
    },
    Gem {
        kappa_eff: f64,
        #[serde(default = "one")]
        gamma: f64,
        #[serde(default = "one")]
        chi_grad: f64,
        #[serde(default)]
        t1: f64,
        #[serde(default)]
        t_e: f64,
        #[serde(default = "forward")]
        geometry: Geometry,
    },
    AfcFwd {
        finesse: f64,
        /// Bare-line resonant depth; the comb depth is `depth / finesse`.
        depth: f64,
    },
    AfcBwd {
        finesse: f64,
        depth: f64,
        /// Use the infinitely deep sample.
        #[serde(default)]
        deep_limit: bool,
    },
    AfcDispersion {
        finesse: f64,
        depth: f64,
        delta0: f64,
    },
    Rose {
        /// `0` selects the weak-signal limit.
        #[serde(default)]
        theta_s0: f64,
        #[serde(default = "one")]
        gamma: f64,
    },
}

fn forward() -> Geometry {
    Geometry::Forward
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::CribFwd { .. } => "crib-fwd",
            Protocol::CribBwd { .. } => "crib-bwd",
            Protocol::Gem { .. } => "gem",
            Protocol::AfcFwd { .. } => "afc-fwd",
            Protocol::AfcBwd { .. } => "afc-bwd",
            Protocol::AfcDispersion { .. } => "afc-dispersion",
            Protocol::Rose { .. } => "rose",
        }
    }

    pub fn default_sweep(&self) -> Sweep {
        match self {
            Protocol::AfcDispersion { .. } => Sweep::Delta0Omega,
            Protocol::Rose { .. } => Sweep::ThetaCAlphaz,
            _ => Sweep::DepthOmega,
        }
    }
}

/// A grid axis: explicit values or an inclusive linear range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    Linspace { start: f64, stop: f64, points: usize },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Axis::Values(ref v) => v.clone(),
            Axis::Linspace { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![start],
                n => (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
            },
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Axis::Values(v) => v.len(),
            Axis::Linspace { points, .. } => *points,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    /// Frequency offset in units of the line width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Axis>,
    /// Resonant depth `alpha_R(0) L` (`kappa_eff` for GEM).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<Axis>,
    /// Input signal area, radians.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_s: Option<Axis>,
    /// Equal control areas, radians.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_c: Option<Axis>,
    /// `alpha0 z`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphaz: Option<Axis>,
    /// AFC window width in units of the line width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<Axis>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sweep {
    DepthOmega,
    DepthThetaS,
    Delta0Omega,
    ThetaCAlphaz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    /// Spectral HWe^-1M width; the duration is its inverse.
    pub bandwidth: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    pub samples: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub svg: bool,
}

fn field(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("{path}: {msg}"))
}

fn finite(path: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(field(path, format!("must be finite, got {v}")))
    }
}

fn non_negative(path: &str, v: f64) -> Result<()> {
    finite(path, v)?;
    if v < 0.0 {
        return Err(field(path, format!("must be non-negative, got {v}")));
    }
    Ok(())
}

fn check_axis(path: &str, axis: &Axis, lo: f64, hi: f64) -> Result<()> {
    if let Axis::Linspace { start, stop, .. } = axis {
        finite(&format!("{path}.start"), *start)?;
        finite(&format!("{path}.stop"), *stop)?;
    }
    if axis.is_empty() {
        return Err(field(path, "grid is empty"));
    }
    for (k, v) in axis.values().iter().enumerate() {
        finite(&format!("{path}[{k}]"), *v)?;
        if !(lo..=hi).contains(v) {
            return Err(field(&format!("{path}[{k}]"), format!("{v} outside [{lo}, {hi}]")));
        }
    }
    Ok(())
}

impl RunConfig {
    /// Parses and validates; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::InvalidInput(format!("config {path} (line {}, column {}): {inner}", inner.line(), inner.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical JSON of everything that determines the numbers.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn sweep(&self) -> Sweep {
        self.sweep.unwrap_or_else(|| self.protocol.default_sweep())
    }

    pub fn validate(&self) -> Result<()> {
        match self.protocol {
            Protocol::CribFwd { depth, gamma, .. } | Protocol::CribBwd { depth, gamma, .. } => {
                non_negative("protocol.depth", depth)?;
                DephasingFactor::new(gamma).map_err(|e| field("protocol.gamma", e))?;
            }
            Protocol::Gem { kappa_eff, gamma, chi_grad, t1, t_e, .. } => {
                non_negative("protocol.kappa_eff", kappa_eff)?;
                DephasingFactor::new(gamma).map_err(|e| field("protocol.gamma", e))?;
                finite("protocol.chi_grad", chi_grad)?;
                if chi_grad <= 0.0 {
                    return Err(field("protocol.chi_grad", "must be positive"));
                }
                non_negative("protocol.t1", t1)?;
                finite("protocol.t_e", t_e)?;
            }
            Protocol::AfcFwd { finesse, depth } | Protocol::AfcBwd { finesse, depth, .. } => {
                self.comb(finesse, 1.0, depth, LineShape::Lorentzian)?;
            }
            Protocol::AfcDispersion { finesse, depth, delta0 } => {
                self.comb(finesse, delta0, depth, LineShape::Gaussian)?;
            }
            Protocol::Rose { theta_s0, gamma } => {
                AreaProtocolConfig {
                    theta_s0,
                    theta_c1: 0.0,
                    theta_c2: 0.0,
                    gamma_e: gamma,
                    alpha0: 1.0,
                    length: 1.0,
                    geometry: Geometry::Forward,
                }
                .validate()
                .map_err(|e| field("protocol", e))?;
            }
        }
        let g = &self.grids;
        if let Some(a) = &g.omega {
            check_axis("grids.omega", a, f64::NEG_INFINITY, f64::INFINITY)?;
        }
        if let Some(a) = &g.depth {
            check_axis("grids.depth", a, 0.0, f64::INFINITY)?;
        }
        if let Some(a) = &g.theta_s {
            check_axis("grids.theta_s", a, 0.0, PI - 1e-9)?;
        }
        if let Some(a) = &g.theta_c {
            check_axis("grids.theta_c", a, 0.0, PI)?;
        }
        if let Some(a) = &g.alphaz {
            check_axis("grids.alphaz", a, 0.0, f64::INFINITY)?;
        }
        if let Some(a) = &g.delta0 {
            check_axis("grids.delta0", a, f64::MIN_POSITIVE, f64::INFINITY)?;
        }
        if let Some(p) = &self.pulse {
            finite("pulse.bandwidth", p.bandwidth)?;
            if p.bandwidth <= 0.0 {
                return Err(field("pulse.bandwidth", "must be positive"));
            }
            finite("pulse.amplitude", p.amplitude)?;
            finite("pulse.dt", p.dt)?;
            if p.dt <= 0.0 {
                return Err(field("pulse.dt", "must be positive"));
            }
            if p.samples < 2 || p.samples % 2 != 0 {
                return Err(field("pulse.samples", "must be even and at least 2"));
            }
        }
        if let Some(d) = &self.design {
            d.validate().map_err(|e| field("design", e))?;
        }
        if self.max_cells == 0 {
            return Err(field("max_cells", "must be positive"));
        }
        Ok(())
    }

    fn comb(&self, finesse: f64, delta0: f64, depth: f64, shape: LineShape) -> Result<AfcComb> {
        let host = InhomogeneousLine::new(shape, 1.0, None)?;
        AfcComb::with_finesse(finesse, delta0, host, depth).map_err(|e| field("protocol", e))
    }

    /// Required axis, with a diagnostic naming it when absent.
    pub fn axis(&self, name: &str) -> Result<Vec<f64>> {
        let g = &self.grids;
        let a = match name {
            "omega" => &g.omega,
            "depth" => &g.depth,
            "theta_s" => &g.theta_s,
            "theta_c" => &g.theta_c,
            "alphaz" => &g.alphaz,
            "delta0" => &g.delta0,
            _ => unreachable!("unknown axis {name}"),
        };
        match a {
            Some(a) => Ok(a.values()),
            None => Err(field(&format!("grids.{name}"), "required by this command")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let c = RunConfig::from_json(r#"{"protocol": {"kind": "crib-bwd", "depth": 2}, "grids": {"omega": [0, 1]}}"#).unwrap();
        assert_eq!(c.protocol.name(), "crib-bwd");
        assert_eq!(c.axis("omega").unwrap(), vec![0.0, 1.0]);
        assert_eq!(c.max_cells, DEFAULT_MAX_CELLS);
    }

    #[test]
    fn linspace_axis() {
        let a = Axis::Linspace { start: 0.0, stop: 1.0, points: 5 };
        assert_eq!(a.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn diagnostics_name_field() {
        let e = RunConfig::from_json(r#"{"protocol": {"kind": "crib-bwd", "depth": 2, "bogus": 1}}"#).unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
        let e = RunConfig::from_json(r#"{"protocol": {"kind": "crib-bwd", "depth": -2}}"#).unwrap_err();
        assert!(e.to_string().contains("protocol.depth"), "{e}");
        let e = RunConfig::from_json(r#"{"protocol": {"kind": "crib-bwd", "depth": 2}, "grids": {"omega": []}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("grids.omega"), "{e}");
    }

    #[test]
    fn output_not_embedded() {
        let a = RunConfig::from_json(r#"{"protocol": {"kind": "gem", "kappa_eff": 3}, "output": {"dir": "x"}}"#).unwrap();
        let b = RunConfig::from_json(r#"{"protocol": {"kind": "gem", "kappa_eff": 3}}"#).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
        let again = RunConfig::from_json(&a.canonical_json()).unwrap();
        assert_eq!(again.canonical_json(), a.canonical_json());
    }
}
