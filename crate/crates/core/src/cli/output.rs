//! CSV, metadata JSON and SVG writers.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// `{:.16e}`: 17 significant digits, enough to round-trip an f64.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sha256_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Tabular output with the producing config embedded as comment lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, config_json: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# config: {config_json}");
        let _ = writeln!(out, "# config_sha256: {}", sha256_hex(config_json));
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Side-car metadata; the only place a wall-clock timestamp appears.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata<'a> {
    pub command: &'a str,
    pub protocol: &'a str,
    pub version: &'a str,
    pub config_sha256: String,
    pub timestamp_unix: u64,
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<(String, usize)>,
}

pub fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn write(dir: &Path, name: &str, contents: &str) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn range(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;

fn frame(out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn ticks(out: &mut String, xr: (f64, f64), yr: (f64, f64)) {
    let _ = writeln!(out, r#"<text x="{PAD}" y="{}" text-anchor="middle">{:.3}</text>"#, H - PAD + 15.0, xr.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{:.3}</text>"#, W - PAD, H - PAD + 15.0, xr.1);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{:.3}</text>"#, PAD - 4.0, H - PAD, yr.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{:.3}</text>"#, PAD - 4.0, PAD + 4.0, yr.1);
}

/// Line plot of one or more series sharing an x axis.
pub fn line_plot(title: &str, xlabel: &str, x: &[f64], series: &[(&str, Vec<f64>)]) -> String {
    let mut out = String::new();
    frame(&mut out, title, xlabel, "");
    let xr = range(x);
    let all: Vec<f64> = series.iter().flat_map(|(_, v)| v.iter().copied()).filter(|v| v.is_finite()).collect();
    let yr = if all.is_empty() { (0.0, 1.0) } else { range(&all) };
    ticks(&mut out, xr, yr);
    let px = |v: f64| PAD + (v - xr.0) / (xr.1 - xr.0) * (W - 2.0 * PAD);
    let py = |v: f64| H - PAD - (v - yr.0) / (yr.1 - yr.0) * (H - 2.0 * PAD);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = colors[k % colors.len()];
        let pts: Vec<String> = x
            .iter()
            .zip(ys)
            .filter(|(_, y)| y.is_finite())
            .map(|(a, b)| format!("{:.2},{:.2}", px(*a), py(*b)))
            .collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}" text-anchor="end">{}</text>"#,
            W - PAD - 5.0,
            PAD + 15.0 * (k + 1) as f64,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Heatmap of `z[row][col]` with rows along y and columns along x.
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, x: &[f64], y: &[f64], z: &[Vec<f64>]) -> String {
    let mut out = String::new();
    frame(&mut out, title, xlabel, ylabel);
    let finite: Vec<f64> = z.iter().flatten().copied().filter(|v| v.is_finite()).collect();
    let zr = if finite.is_empty() { (0.0, 1.0) } else { range(&finite) };
    ticks(&mut out, range(x), range(y));
    let cw = (W - 2.0 * PAD) / x.len().max(1) as f64;
    let ch = (H - 2.0 * PAD) / y.len().max(1) as f64;
    for (i, row) in z.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let t = if v.is_finite() { ((v - zr.0) / (zr.1 - zr.0)).clamp(0.0, 1.0) } else { 0.0 };
            // Dark blue -> yellow.
            let r = (255.0 * t) as u8;
            let g = (40.0 + 200.0 * t) as u8;
            let b = (120.0 * (1.0 - t)) as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({r},{g},{b})"/>"#,
                PAD + j as f64 * cw,
                H - PAD - (i + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">range [{:.4}, {:.4}]</text>"#,
        W - PAD,
        PAD - 6.0,
        zr.0,
        zr.1
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0, 0.1]);
        let csv = t.to_csv("{}");
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# config: {}"));
        assert!(lines[1].starts_with("# config_sha256: "));
        assert_eq!(lines[2], "a,b");
        assert_eq!(lines[3], "1.0000000000000000e0,1.0000000000000001e-1");
        assert_eq!("1.0000000000000001e-1".parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn svg_is_closed() {
        let s = heatmap("t", "x", "y", &[0.0, 1.0], &[0.0], &[vec![0.0, 1.0]]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        let s = line_plot("t", "x", &[0.0, 1.0], &[("a", vec![0.0, 1.0])]);
        assert!(s.contains("polyline"));
    }
}
