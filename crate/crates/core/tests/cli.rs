//! End-to-end runs of the `tfdcs` binary: exit codes, table layout, file
//! round-trips and reproducibility.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tfdcs::model::DeformedModel;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tfdcs"));
    c.env_remove("TFDCS_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn model_path(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "models", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o).lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn eval_partition_matches_closed_form() {
    let o = run(&["eval", "--model", &model_path("oscillator.json"), "--beta", "1", "--quantity", "partition"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("beta,partition\n"));
    assert!(!text.contains('\r'));
    let z: f64 = csv_rows(&o)[0][1].parse().unwrap();
    let want = (-0.5f64).exp() / (1.0 - (-1.0f64).exp());
    assert!((z - want).abs() / want < 1e-12, "{z} vs {want}");
}

#[test]
fn cold_thermal_vacuum_is_the_ground_state() {
    let o = run(&["eval", "--model", &model_path("oscillator.json"), "--beta", "1000", "--quantity", "thermal-vacuum"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], "0");
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn scan_emits_one_row_per_grid_point() {
    let o = run(&[
        "scan",
        "--model",
        &model_path("bessel_b2.json"),
        "--beta",
        "0.1:10:3",
        "--geometric",
        "--quantity",
        "partition,theta,internal-energy",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "beta,partition,theta,internal_energy,error");
    let betas: Vec<f64> = csv_rows(&o).iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(betas, vec![0.1, 1.0, 10.0]);
    for r in csv_rows(&o) {
        assert_eq!(r.len(), 5);
        assert!(r[4].is_empty(), "unexpected error column {:?}", r[4]);
    }

    let o = run(&["scan", "--model", &model_path("oscillator.json"), "--beta", "0.5:2:7", "--quantity", "nT"]);
    assert_eq!(csv_rows(&o).len(), 7);
}

#[test]
fn output_is_reproducible_across_thread_counts() {
    let args = [
        "scan",
        "--model",
        &model_path("bessel_b2_linear.json"),
        "--beta",
        "0.2:4:25",
        "--quantity",
        "partition,free-energy,vacuum-expect,thermal-expect",
    ];
    let one = bin().env("TFDCS_THREADS", "1").args(args).output().unwrap();
    let four = bin().env("TFDCS_THREADS", "4").args(args).output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn coherent_state_table_is_normalized() {
    let o = run(&[
        "cs",
        "--model",
        &model_path("oscillator.json"),
        "--kind",
        "bg",
        "--z-re",
        "0.7",
        "--z-im",
        "-0.3",
        "--beta",
        "1.5",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    let total: f64 = doc["rows"].as_array().unwrap().iter().map(|r| r["abs2"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn qubit_rows_and_degenerate_levels() {
    let o = run(&["qubit", "--e0", "0", "--e1", "1", "--beta", &3f64.ln().to_string()]);
    assert_eq!(o.status.code(), Some(0));
    let r = &csv_rows(&o)[0];
    let c0: f64 = r[1].parse().unwrap();
    let c1: f64 = r[2].parse().unwrap();
    assert!((c0 - 0.75f64.sqrt()).abs() < 1e-15);
    assert!((c1 - 0.5).abs() < 1e-15);

    let o = run(&["qubit", "--e0", "1", "--e1", "1", "--beta", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"p": 1, "q": 0, "a": [], "b": [], "hbar_omega": 1.0, "spectrum": {"kind": "linear"}}"#).unwrap();
    let o = run(&["eval", "--model", bad.to_str().unwrap(), "--beta", "1", "--quantity", "theta"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["eval", "--model", &model_path("oscillator.json"), "--beta", "2:1:4", "--quantity", "theta"]);
    assert_eq!(o.status.code(), Some(2));

    let o = bin()
        .env("TFDCS_THREADS", "0")
        .args(["eval", "--model", &model_path("oscillator.json"), "--beta", "1", "--quantity", "theta"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_3_with_error_name() {
    let o = run(&["eval", "--model", &model_path("oscillator.json"), "--beta", "1e-13", "--quantity", "theta"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[divergent]"));
}

#[test]
fn model_print_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["oscillator.json", "oscillator_generalized.json", "bessel_b2.json", "bessel_b2_linear.json"] {
        let o = run(&["model", "print", "--model", &model_path(name)]);
        assert_eq!(o.status.code(), Some(0));
        let echoed = dir.path().join(name);
        std::fs::write(&echoed, &o.stdout).unwrap();
        let original = DeformedModel::from_json(&std::fs::read_to_string(model_path(name)).unwrap()).unwrap();
        let again = DeformedModel::from_json(&std::fs::read_to_string(&echoed).unwrap()).unwrap();
        assert_eq!(original, again);
        let twice = run(&["model", "print", "--model", echoed.to_str().unwrap()]);
        assert_eq!(twice.stdout, o.stdout);
    }
}

#[test]
fn verify_thermal_on_oscillator_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = run(&["verify", "--suite", "thermal", "--model", &model_path("oscillator.json"), "--out", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["summary"]["overall_pass"], true);
    assert_eq!(doc["summary"]["failed"], 0);
}

#[test]
fn impossible_tolerance_forces_failures() {
    let o = run(&["verify", "--suite", "thermal", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["summary"]["overall_pass"], false);
    assert!(doc["summary"]["failed"].as_u64().unwrap() > 0);
}

#[test]
fn p_checks_on_generalized_spectrum_are_skipped() {
    let o = run(&["verify", "--suite", "quasiprob", "--model", &model_path("bessel_b2.json")]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let p_checks: Vec<&Value> = doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"].as_str().unwrap().starts_with("p_"))
        .collect();
    assert!(!p_checks.is_empty());
    for c in p_checks {
        assert_eq!(c["status"], "skip", "{c}");
        assert!(c["reason"].as_str().is_some_and(|r| !r.is_empty()));
    }
}
