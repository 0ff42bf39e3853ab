//! End-to-end runs of the `echomem` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_echomem");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("ECHOMEM_OUT").current_dir(dir).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

/// Parses a CSV written by the CLI: skips `#` lines, returns header and rows.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn respond_backward_crib_at_line_center() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"protocol": {"kind": "crib-bwd", "depth": 2.0}, "grids": {"omega": [-1.0, 0.0, 1.0]}}"#,
    );
    let o = run(tmp.path(), &["--out", "out", "respond", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, rows) = read_csv(&tmp.path().join("out/respond_crib-bwd.csv"));
    let (w, eta) = (col(&h, "omega_over_Din"), col(&h, "eta"));
    let center = rows.iter().find(|r| r[w] == 0.0).unwrap();
    let expect = (1.0 - (-2f64).exp()).powi(2);
    assert!((center[eta] - expect).abs() < 1e-12, "{} vs {expect}", center[eta]);
    // Backward CRIB response is even in the offset.
    assert_eq!(rows[0][eta], rows[2][eta]);
    assert!(tmp.path().join("out/respond_crib-bwd.meta.json").exists());
}

#[test]
fn respond_afc_backward_deep_limit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"protocol": {"kind": "afc-bwd", "finesse": 1000.0, "depth": 30000.0, "deep_limit": true},
            "grids": {"omega": [0.0, 1.0]}}"#,
    );
    let o = run(tmp.path(), &["--out", ".", "respond", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, rows) = read_csv(&tmp.path().join("respond_afc-bwd.csv"));
    let eta = col(&h, "eta");
    assert!((rows[1][eta] - 0.5).abs() < 1e-4, "{}", rows[1][eta]);
    assert!(rows[0][eta] > rows[1][eta]);
}

#[test]
fn embedded_config_hash_ignores_formatting() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write_config(tmp.path(), "a.json", r#"{"protocol":{"kind":"crib-fwd","depth":2.0},"grids":{"omega":[0.0]}}"#);
    let b = write_config(
        tmp.path(),
        "b.json",
        "{\n  \"grids\": {\"omega\": [0.0]},\n  \"protocol\": {\"depth\": 2.0, \"kind\": \"crib-fwd\"}\n}\n",
    );
    let hash = |cfg: &Path, out: &str| {
        let o = run(tmp.path(), &["--out", out, "respond", "--config", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let text = std::fs::read_to_string(tmp.path().join(out).join("respond_crib-fwd.csv")).unwrap();
        assert!(text.starts_with("# config: {"));
        text.lines().nth(1).unwrap().to_string()
    };
    assert_eq!(hash(&a, "a"), hash(&b, "b"));
}

#[test]
fn invalid_configs_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = write_config(tmp.path(), "e.json", r#"{"protocol": {"kind": "crib-bwd", "depth": 2.0}, "grids": {"omega": []}}"#);
    let o = run(tmp.path(), &["respond", "--config", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let unknown = write_config(
        tmp.path(),
        "u.json",
        r#"{"protocol": {"kind": "crib-bwd", "depth": 2.0, "detph": 1.0}, "grids": {"omega": [0.0]}}"#,
    );
    let o = run(tmp.path(), &["respond", "--config", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("protocol"), "{}", stderr(&o));

    let negative = write_config(tmp.path(), "n.json", r#"{"protocol": {"kind": "crib-bwd", "depth": -1.0}, "grids": {"omega": [0.0]}}"#);
    assert_eq!(run(tmp.path(), &["respond", "--config", negative.to_str().unwrap()]).status.code(), Some(2));

    let o = run(tmp.path(), &["respond", "--config", "does-not-exist.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!tmp.path().join("respond_crib-bwd.csv").exists());
}

#[test]
fn map_single_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "m.json",
        r#"{"protocol": {"kind": "crib-fwd", "depth": 2.0}, "grids": {"depth": [2.0], "omega": [0.0]}}"#,
    );
    let o = run(tmp.path(), &["--out", ".", "map", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, rows) = read_csv(&tmp.path().join("map_crib-fwd.csv"));
    assert_eq!(rows.len(), 1);
    let eta = rows[0][col(&h, "eta")];
    assert!((eta - 4.0 * (-2f64).exp()).abs() < 1e-12);
}

#[test]
fn map_rejects_oversized_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "m.json",
        r#"{"protocol": {"kind": "crib-fwd", "depth": 2.0},
            "grids": {"depth": {"start": 0.0, "stop": 1.0, "points": 100}, "omega": {"start": 0.0, "stop": 1.0, "points": 100}},
            "max_cells": 1000}"#,
    );
    assert_eq!(run(tmp.path(), &["map", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

fn echo_summary(tmp: &Path, tag: &str, protocol: &str, bandwidth: f64) -> serde_json::Value {
    let cfg = write_config(
        tmp,
        &format!("{tag}.json"),
        &format!(r#"{{"protocol": {protocol}, "pulse": {{"bandwidth": {bandwidth}, "samples": 4096, "dt": 0.02}}}}"#),
    );
    let o = run(tmp, &["--out", tag, "echo", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let kind: serde_json::Value = serde_json::from_str(protocol).unwrap();
    let name = kind["kind"].as_str().unwrap();
    let text = std::fs::read_to_string(tmp.join(tag).join(format!("echo_{name}_summary.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn echo_zero_depth_is_silent() {
    let tmp = tempfile::tempdir().unwrap();
    let s = echo_summary(tmp.path(), "z", r#"{"kind": "crib-bwd", "depth": 0.0}"#, 0.5);
    assert_eq!(s["echo_energy"].as_f64().unwrap(), 0.0);
    assert_eq!(s["efficiency"].as_f64().unwrap(), 0.0);
    assert!(s["input_energy"].as_f64().unwrap() > 0.0);
}

#[test]
fn echo_broadband_pulse_is_stretched_more() {
    let tmp = tempfile::tempdir().unwrap();
    let stretch = |tag: &str, b: f64| {
        let s = echo_summary(tmp.path(), tag, r#"{"kind": "crib-fwd", "depth": 2.0}"#, b);
        s["echo_duration_rms"].as_f64().unwrap() / s["input_duration_rms"].as_f64().unwrap()
    };
    let narrow = stretch("n", 0.7);
    let broad = stretch("b", 1.5);
    assert!(narrow > 1.0 && broad > narrow, "narrow {narrow}, broad {broad}");
}

#[test]
fn strict_mode_rejects_aliased_pulse() {
    let tmp = tempfile::tempdir().unwrap();
    // Spectrum reaching the edge of the grid's Nyquist band.
    let cfg = write_config(
        tmp.path(),
        "a.json",
        r#"{"protocol": {"kind": "crib-fwd", "depth": 2.0}, "pulse": {"bandwidth": 15.0, "samples": 256, "dt": 0.1}}"#,
    );
    let lax = run(tmp.path(), &["--out", "lax", "echo", "--config", cfg.to_str().unwrap()]);
    assert_eq!(lax.status.code(), Some(0), "{}", stderr(&lax));
    assert!(String::from_utf8_lossy(&lax.stdout).contains("warning"));
    let strict = run(tmp.path(), &["--strict", "--out", "strict", "echo", "--config", cfg.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(4), "{}", stderr(&strict));
}

#[test]
fn infeasible_design_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "d.json",
        r#"{"protocol": {"kind": "afc-dispersion", "finesse": 10.0, "depth": 80.0, "delta0": 1.25},
            "design": {"target_bandwidth": 0.9, "finesse": {"lo": 10.0, "hi": 10.0},
                       "delta0": {"lo": 0.95, "hi": 1.6}, "depth": {"lo": 80.0, "hi": 80.0}}}"#,
    );
    let o = run(tmp.path(), &["--out", ".", "afc-design", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("afc_design_report.json")).unwrap()).unwrap();
    assert!(report.to_string().contains("infeasible") || report.to_string().contains("false"));
}

#[test]
fn verify_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["verify", "--only", "special", "--only", "model"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(tmp.path(), &["verify", "--only", "special", "--perturb", "1e-3"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    assert_eq!(run(tmp.path(), &["verify", "--only", "nonexistent"]).status.code(), Some(2));
    let list = run(tmp.path(), &["verify", "--list"]);
    assert!(String::from_utf8_lossy(&list.stdout).lines().count() >= 10);
}

#[test]
fn output_directory_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"protocol": {"kind": "crib-bwd", "depth": 1.0}, "grids": {"omega": [0.0]}, "output": {"dir": "from_config"}}"#,
    );
    let c = cfg.to_str().unwrap();
    let with_env = |args: &[&str]| {
        Command::new(BIN).args(args).env("ECHOMEM_OUT", "from_env").current_dir(tmp.path()).output().unwrap()
    };
    assert_eq!(run(tmp.path(), &["respond", "--config", c]).status.code(), Some(0));
    assert!(tmp.path().join("from_config/respond_crib-bwd.csv").exists());
    assert_eq!(with_env(&["respond", "--config", c]).status.code(), Some(0));
    assert!(tmp.path().join("from_env/respond_crib-bwd.csv").exists());
    assert_eq!(with_env(&["--out", "from_flag", "respond", "--config", c]).status.code(), Some(0));
    assert!(tmp.path().join("from_flag/respond_crib-bwd.csv").exists());
}
