use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_instanton")).args(args).output().expect("binary runs")
}

fn results(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("results.json")).unwrap()).unwrap()
}

fn value(doc: &Value, key: &str) -> f64 {
    doc["results"][key]["value"].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

/// Data lines of a CSV after the provenance comment.
fn csv_lines(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# instanton "));
    lines.map(str::to_string).collect()
}

#[test]
fn double_well_splitting() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("dw");
    let o = run(&["double-well", "--hbar", "0.1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = results(&out);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["tool"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["parameters"]["hbar"], 0.1);
    assert!((value(&doc, "delta_E_instanton") / 6.740e-2 - 1.0).abs() < 1e-3);
    assert!(value(&doc, "delta_E_oracle") > 0.0);
    assert!(doc["results"]["S0"]["method"].is_string());
    assert_eq!(doc["results"]["K"]["units"], "frequency");
}

#[test]
fn charge_band_files() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["charge", "--ej", "100", "--ec", "1", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = results(tmp.path());
    let r = value(&doc, "bandwidth_instanton") / value(&doc, "bandwidth_oracle");
    assert!((r - 1.0).abs() < 0.05);
    let lines = csv_lines(&tmp.path().join("band.csv"));
    assert_eq!(lines[0], "theta,E_instanton,E_oracle");
    assert_eq!(lines.len(), 1 + 65);
}

#[test]
fn empty_sweep_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let o = run(&[
        "sweep", "--sweep-command", "wkb", "--sweep-param", "hbar", "--sweep-from", "0.5", "--sweep-to", "1",
        "--sweep-steps", "0", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "validation");
    assert!(!out.exists());
}

#[test]
fn sweep_rows_match_steps() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "sweep", "--sweep-command", "wkb", "--sweep-param", "hbar", "--sweep-from", "0.6", "--sweep-to", "1.0",
        "--sweep-steps", "3", "--a", "3", "--out", tmp.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines = csv_lines(&tmp.path().join("sweep.csv"));
    assert!(lines[0].starts_with("hbar,"));
    assert!(lines[0].ends_with(",error"));
    assert_eq!(lines.len(), 1 + 3);
    let first: Vec<f64> = lines[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(first, vec![0.6, 0.8, 1.0]);
}

#[test]
fn identical_config_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"command": "wkb", "hbar": 0.8, "a": 3, "n_max": 2, "format": ["json", "csv"]}"#).unwrap();
    for d in ["a", "b"] {
        let o = run(&["wkb", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join(d).to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["results.json", "wkb.csv"] {
        assert_eq!(std::fs::read(tmp.path().join("a").join(f)).unwrap(), std::fs::read(tmp.path().join("b").join(f)).unwrap());
    }
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"hbar": 0.9, "a": 3}"#).unwrap();
    let out = tmp.path().join("o");
    let o = run(&["wkb", "--config", cfg.to_str().unwrap(), "--hbar", "0.7", "--format", "json", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = results(&out);
    assert_eq!(doc["config"]["parameters"]["hbar"], 0.7);
    assert_eq!(doc["config"]["parameters"]["a"], 3.0);
    assert!(!out.join("wkb.csv").exists());
}

#[test]
fn unknown_config_key_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"hbar": 0.9, "colour": "red"}"#).unwrap();
    let o = run(&["wkb", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["double-well", "--ej", "3", "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn solver_error_names_module() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = run(&["washboard", "--ej", "1", "--ec", "0.02", "--ie", "1.2", "--ic", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "solver");
    assert_eq!(err["error"]["module"], "spectra");
    assert_eq!(err["error"]["operation"], "washboard_analysis");
    assert!(!out.exists());
}

#[test]
fn washboard_with_gl_correction() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "washboard", "--ej", "1", "--ec", "0.02", "--ie", "0.9", "--ic", "1", "--with-gl-correction", "--l-over-zeta",
        "0.8", "--delta-points", "32", "--out", tmp.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = results(tmp.path());
    let (g0, g1) = (value(&doc, "Gamma"), value(&doc, "Gamma_corrected"));
    assert!(g0 > 0.0 && g1 > 0.0 && g0 != g1);
    assert_eq!(csv_lines(&tmp.path().join("survival.csv")).len(), 1 + 512);
    assert!(tmp.path().join("gl_correction.csv").exists());
}

#[test]
fn oracle_rabi_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "oracle", "--levels", "2", "--points", "1024", "--drive", "0.01", "--samples", "51", "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = results(tmp.path());
    assert!(value(&doc, "max_norm_error") < 1e-8);
    let lines = csv_lines(&tmp.path().join("populations.csv"));
    assert_eq!(lines[0], "t,P0,P1");
    assert_eq!(lines.len(), 1 + 51);
}

#[test]
fn flux_symmetric_doublet() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["flux", "--ej", "3", "--ec", "0.2", "--el", "1", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = results(tmp.path());
    let (left, right) = (value(&doc, "minimum_left"), value(&doc, "minimum_right"));
    assert!((left + right - 2.0 * std::f64::consts::PI).abs() < 1e-8);
    let r = value(&doc, "delta_E_instanton") / value(&doc, "delta_E_oracle");
    assert!(r > 0.5 && r < 2.0, "{r}");
}

#[test]
fn gl_cpr_series() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["gl-cpr", "--l-over-zeta", "0.3", "--delta-points", "16", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = results(tmp.path());
    assert!(value(&doc, "max_residual") < 1e-8);
    assert_eq!(csv_lines(&tmp.path().join("cpr.csv"))[0], "delta,J,deviation,J_sinc");
}

#[test]
fn bounce_mode_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["double-well", "--g", "-0.2", "--bigN", "3", "--hbar", "0.5", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = results(tmp.path());
    assert!((value(&doc, "ratio_numeric_closed_form") - 1.0).abs() < 0.02);
    assert!((value(&doc, "Gamma") / (2.0 * value(&doc, "im_E0")) - 1.0).abs() < 1e-12);
}
