use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nc-soliton"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn moyal_gaussian_is_a_soliton() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let o = run(&["moyal", "--window", "gaussian", "--lambda", "0", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["passed"], true);
    let r = &v["report"];
    assert!((r["charge"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert!(r["sd_residual"].as_f64().unwrap() < 1e-5);
    assert_eq!(r["self_dual"], true);
}

#[test]
fn moyal_hermite_is_reported_not_failed() {
    let o = run(&["moyal", "--window", "hermite:1"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["self_dual"], false);
    assert!(v["report"]["sd_residual"].as_f64().unwrap() > 1e-2);
    assert!(v["report"]["projection_residual"].as_f64().unwrap() < 1e-5);
}

#[test]
fn configuration_errors_exit_two() {
    for args in [
        &["moyal", "--window", "gaussian", "--lambda", "0", "--grid-N", "0"][..],
        &["torus", "--theta", "1.2", "--window", "gaussian"],
        &["torus", "--window", "gaussian"],
        &["torus", "--theta", "0.5", "--window", "hermite:x"],
        &["moyal", "--window", "hermite:1", "--lambda", "1"],
        &["sweep", "--theta-range", "0.7,0.3,0.1"],
        &["sweep", "--theta-range", "0.3,0.7"],
        &["sweep", "--thetas", "0.3,1.5"],
        &["verify", "--only", "no-such-check"],
        &["verify", "--tolerance", "-1"],
        &["bogus"],
    ] {
        let o = run(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = bin().args(["verify", "--only", "stft-closed-form"]).env("NC_SOLITON_THREADS", "zero").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn torus_gaussian_certificate() {
    let o = run(&["torus", "--theta", "0.5", "--window", "gaussian"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &v["report"];
    assert!(r["bound_gap"].as_f64().unwrap().abs() < 1e-3);
    assert!((r["c1"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert_eq!(r["is_frame"], true);
}

#[test]
fn non_frame_windows_exit_zero() {
    let o = run(&["torus", "--theta", "0.5", "--window", "hermite:1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["is_frame"], false);
    assert!(v["report"]["c1"].is_null());
}

#[test]
fn torus_hermite_below_threshold_reports() {
    let o = run(&["torus", "--theta", "0.45", "--window", "hermite:1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &v["report"];
    assert_eq!(r["is_frame"], true);
    assert!((r["c1"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    // Reported, not asserted: this projection is not self-dual.
    assert_eq!(r["self_dual"], false);
}

#[test]
fn tolerance_override_forces_failure() {
    let o = run(&["torus", "--theta", "0.5", "--window", "gaussian", "--tolerance", "1e-30"]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], false);
    assert!(!v["failures"].as_array().unwrap().is_empty());
}

#[test]
fn truncation_overrides_are_used() {
    let o = run(&["torus", "--theta", "0.5", "--window", "gaussian", "--K", "12", "--L", "10", "--R", "6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let ctx = &v["report"]["context"];
    assert_eq!((ctx["k_max"].as_u64(), ctx["l_max"].as_u64(), ctx["r_max"].as_u64()), (Some(12), Some(10), Some(6)));
}

#[test]
fn sweep_is_deterministic_and_matches_torus() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = run(&["sweep", "--thetas", "0.3,0.5", "--window", "gaussian", "--output", path.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theta,window,is_frame,c1,action,bound_gap,proj_residual,sd_residual,eigen_residual,trace_re");
    assert_eq!(lines.len(), 3);
    let torus = run(&["torus", "--theta", "0.5", "--window", "gaussian", "--format", "csv"]);
    let row = String::from_utf8(torus.stdout).unwrap();
    assert_eq!(row.lines().nth(1).unwrap(), lines[2]);
    for line in &lines[1..] {
        let c1: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((c1 - 1.0).abs() < 1e-3);
    }
}

#[test]
fn verify_filters_and_tolerances() {
    let o = run(&["verify", "--only", "moyal-identity"]);
    assert_eq!(code(&o), 0);
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(table.lines().count(), 1);
    assert!(table.starts_with("PASS  moyal-identity"));
    let o = run(&["verify", "--only", "moyal-curvature,torus-curvature", "--tolerance", "1e-15"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stdout).unwrap().contains("FAIL"));
}

#[test]
fn verify_default_run_passes_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = run(&["verify", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = read_json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 10);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"theta": 1.5, "windows": ["gaussian"], "format": "csv"}"#).unwrap();
    // File value alone is out of range.
    assert_eq!(code(&run(&["torus", "--config", cfg.to_str().unwrap()])), 2);
    let o = run(&["torus", "--config", cfg.to_str().unwrap(), "--theta", "0.5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("theta,window"));
    std::fs::write(&cfg, r#"{"thetaa": 0.5}"#).unwrap();
    assert_eq!(code(&run(&["torus", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["torus", "--config", "/nonexistent/cfg.json"])), 2);
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let a = run(&["torus", "--theta", "0.3", "--window", "gaussian"]);
    let b = run(&["torus", "--theta", "0.3", "--window", "gaussian"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}
