//! End-to-end tests of the command-line binary: exit codes, output
//! files, and basic content sanity.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rotstar"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .args(args)
        .arg("-o")
        .arg(dir)
        .output()
        .expect("binary should execute")
}

#[test]
fn radial_rejects_nonpositive_a() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["radial", "--a", "-1"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn branch_rejects_uniform_rotation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["branch", "--omega", "uniform", "--mass-a", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("not admissible"), "stderr: {err}");
}

#[test]
fn branch_rejects_unknown_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["branch", "--omega", "no-such-profile", "--mass-a", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "radial.rtol = 1e-10\nnot.a.key = 3\n").unwrap();
    let out = bin()
        .args(["radial", "--a", "1", "--config"])
        .arg(&cfg)
        .arg("-o")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn radial_writes_profile_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["radial", "--a", "1"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(tmp.path().join("radial_profile.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "r,w,u,rho");
    assert_eq!(lines.len(), 1002); // header + 1001 samples

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("radial_summary.json")).unwrap())
            .unwrap();
    for key in ["a", "R", "M", "E", "virial_residual", "alpha"] {
        assert!(summary.get(key).is_some(), "missing key {key}");
    }
    assert!(summary["M"].as_f64().unwrap() > 0.0);
    assert!(summary["alpha"].as_f64().unwrap() < 0.0);
    assert!(summary["virial_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn mass_curve_single_point() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["mass-curve", "--a-min", "0.5", "--a-max", "0.5", "--n", "1"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("mass_curve.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "a,R,M,Mprime,E");
    assert_eq!(lines.len(), 3); // header + one row + json footer
    assert!(lines[2].starts_with("# "));
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(row.len(), 5);
    assert!(row[2].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn mass_curve_log_grid_reports_monotone() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["mass-curve", "--a-min", "0.01", "--a-max", "10", "--n", "8", "--log"],
    );
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let footer: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(footer["monotone"], serde_json::Value::Bool(true));
    assert_eq!(footer["points_ok"], footer["points_total"]);
}

#[test]
fn sphere_test_smoke() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["sphere-test", "--resolution", "32", "--order", "8"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("sphere_test.json")).unwrap())
            .unwrap();
    assert!(rep["max_rel_err"].as_f64().unwrap() < 0.05);
}

#[test]
fn sphere_test_rejects_odd_order() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["sphere-test", "--resolution", "32", "--order", "7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn poly43_report_without_probe() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["poly43"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("poly43_report.json")).unwrap())
            .unwrap();
    assert!(rep["central"].as_f64().unwrap() > 0.0);
    assert!(rep["surface_slope"].as_f64().unwrap() < 0.0);
    assert!(rep["probe"].is_null());
    assert!(rep["kernel"]["moment2"].as_f64().unwrap() < 0.0);
}

#[test]
fn branch_smoke_on_coarse_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("coarse.cfg");
    fs::write(&cfg, "scf.nr = 49\nscf.nz = 49\n").unwrap();
    let out = bin()
        .args([
            "branch",
            "--omega",
            "inverse-square",
            "--mass-a",
            "1",
            "--kappa2-max",
            "0.02",
            "--steps",
            "2",
            "--config",
        ])
        .arg(&cfg)
        .arg("-o")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let jsonl = fs::read_to_string(tmp.path().join("branch.jsonl")).unwrap();
    let records: Vec<serde_json::Value> = jsonl
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(records.len() >= 3); // start plus two schedule points
    for rec in &records {
        assert!(rec["margin"].as_f64().unwrap() > 0.0);
        assert!(rec["residual"].as_f64().unwrap() <= 1e-5);
    }

    let term: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("termination.json")).unwrap())
            .unwrap();
    assert_eq!(term["report"]["reason"], "ScheduleExhausted");
    assert_eq!(term["support_audit"]["passed"], serde_json::Value::Bool(true));
    assert!(tmp.path().join("density_000.csv").exists());
}
