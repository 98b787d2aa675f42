use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use toda_cli::SolveSummary;
use toda_core::diagnostics::DiagnosticsReport;
use toda_core::problem::ConditionReport;

fn toda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toda"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn run_mode(mode: &str, config: &Path, out: &Path) -> Output {
    toda(&[mode, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn equilateral() -> Value {
    let r = 2.0 / 3f64.sqrt();
    let pts: Vec<Value> = (0..3)
        .map(|k| {
            let t = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            json!([r * t.cos(), r * t.sin()])
        })
        .collect();
    json!({"dim": 2, "points": pts, "weights": [[0.6, 0.6, 0.6], [0.6, 0.6, 0.6]]})
}

fn family() -> Value {
    let mut pts: Vec<Value> = (0..5)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
            json!([t.cos(), t.sin()])
        })
        .collect();
    pts.push(json!([3.0, 0.0]));
    pts.push(json!([-6.0, 0.0]));
    let b = [0.9, 0.4, 0.4, 0.15, 0.75, 0.55, 0.55];
    let w1: Vec<f64> = (0..7).map(|l| if l < 4 { b[l] } else { 0.0 }).collect();
    let w2: Vec<f64> = (0..7).map(|l| if l < 4 { 0.0 } else { b[l] }).collect();
    json!({"dim": 2, "points": pts, "weights": [w1, w2]})
}

fn coarse() -> Value {
    json!({"core_cells": 12, "patch_layers": 8, "patch_sectors": 12})
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"schema_version\": 1,\n  \"mode\": \"check\",,\n}").unwrap();
    let out = run_mode("check", &path, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");
}

#[test]
fn unknown_schema_and_missing_fields_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let v2 = write_config(dir.path(), "v2.json", &json!({"schema_version": 2, "problem": equilateral()}));
    assert_eq!(run_mode("check", &v2, dir.path()).status.code(), Some(2));
    let empty = write_config(dir.path(), "empty.json", &json!({"schema_version": 1}));
    assert_eq!(run_mode("solve", &empty, dir.path()).status.code(), Some(2));
    let clash = write_config(dir.path(), "clash.json", &json!({"schema_version": 1, "mode": "solve", "problem": equilateral()}));
    assert_eq!(run_mode("check", &clash, dir.path()).status.code(), Some(2));
    let typo = write_config(dir.path(), "typo.json", &json!({"schema_version": 1, "problme": equilateral()}));
    assert_eq!(run_mode("check", &typo, dir.path()).status.code(), Some(2));
    let bad_weight = write_config(
        dir.path(),
        "weight.json",
        &json!({"schema_version": 1, "problem": {"dim": 2, "points": [[0.0, 0.0]], "weights": [[1.5]]}}),
    );
    assert_eq!(run_mode("check", &bad_weight, dir.path()).status.code(), Some(2));
}

#[test]
fn check_family_violates_toda_condition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "check.json", &json!({"schema_version": 1, "mode": "check", "problem": family()}));
    let out = run_mode("check", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("conditions.json")).unwrap();
    let report: ConditionReport = serde_json::from_str(&text).unwrap();
    assert!(report.beta_like.unwrap().holds);
    assert!(!report.toda_existence.unwrap().holds);
    assert!(report.assumptions_a.unwrap().all());
}

#[test]
fn solve_writes_reparseable_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "solve.json",
        &json!({"schema_version": 1, "problem": equilateral(), "grid": coarse()}),
    );
    let out = run_mode("solve", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: SolveSummary =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.status, toda_core::solver::Status::Converged);
    let again = serde_json::to_string_pretty(&summary).unwrap() + "\n";
    assert_eq!(again, std::fs::read_to_string(dir.path().join("summary.json")).unwrap());
    let diag: DiagnosticsReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag.mass.masses.len(), 2);
    let field = std::fs::read_to_string(dir.path().join("field.csv")).unwrap();
    let mut lines = field.lines();
    assert_eq!(lines.next(), Some("x1,x2,chart,u1,u2"));
    assert_eq!(lines.count(), summary.nodes);
    let row: Vec<&str> = field.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), 5);
    let x: f64 = row[0].parse().unwrap();
    assert_eq!(format!("{x:.16e}"), row[0]);
}

#[test]
fn repeated_solve_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "solve.json",
        &json!({"schema_version": 1, "problem": equilateral(), "grid": coarse()}),
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run_mode("solve", &cfg, &a).status.code(), Some(0));
    assert_eq!(run_mode("solve", &cfg, &b).status.code(), Some(0));
    for f in ["history.csv", "field.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn weight_overflow_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cap.json",
        &json!({"schema_version": 1, "problem": equilateral(), "grid": {"core_cells": 12, "log_weight_cap": 1e-3}}),
    );
    let out = run_mode("solve", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_samples_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sweep.json",
        &json!({
            "schema_version": 1,
            "seed": 3,
            "problem": equilateral(),
            "sweep": {"entries": [[0, 0], [1, 2]], "values": [0.1, 0.3, 0.5, 0.7, 0.9], "samples": 7, "solve": false}
        }),
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run_mode("sweep", &cfg, &a).status.code(), Some(0));
    assert_eq!(run_mode("sweep", &cfg, &b).status.code(), Some(0));
    let text = std::fs::read_to_string(a.join("sweep.csv")).unwrap();
    assert_eq!(text, std::fs::read_to_string(b.join("sweep.csv")).unwrap());
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().next().unwrap().starts_with("b1_1,b1_2,b1_3,b2_1"));
}

#[test]
fn sweep_solves_cells() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sweep.json",
        &json!({
            "schema_version": 1,
            "problem": equilateral(),
            "grid": coarse(),
            "sweep": {"entries": [[0, 0]], "values": [0.6]}
        }),
    );
    assert_eq!(run_mode("sweep", &cfg, dir.path()).status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.contains(",Converged,"), "{row}");
}

#[test]
fn failed_validation_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "validate.json",
        &json!({
            "schema_version": 1,
            "grid": coarse(),
            "iteration": {"max_iter": 2},
            "validate": {"three_d": false}
        }),
    );
    let out = run_mode("validate", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("validation.csv")).unwrap();
    assert!(table.contains("grid_n2_alpha0_converged"));
    assert!(table.contains("pohozaev_full_blow_up"));
}

#[test]
fn thread_override_must_be_numeric() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "check.json", &json!({"schema_version": 1, "problem": equilateral()}));
    let out = Command::new(env!("CARGO_BIN_EXE_toda"))
        .args(["check", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .env(toda_cli::THREADS_ENV, "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_toda"))
        .args(["check", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .env(toda_cli::THREADS_ENV, "1")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
}
