//! End-to-end checks of the binary: exit codes, file outputs, and the
//! stability of emitted artifacts.

use std::path::Path;
use std::process::{Command, Output};

fn ising(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ising"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_then_solve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let out = ising(&[
        "generate",
        "--model",
        "mobius",
        "--size",
        "16",
        "--seed",
        "3",
        "--out",
        path_str(&inst),
    ]);
    assert!(out.status.success(), "{out:?}");

    let out = ising(&["solve", "--in", path_str(&inst), "--degeneracy"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["best_energy"], -20.0);
    assert_eq!(report["status"], "optimal");
    assert_eq!(report["ground_degeneracy"], 16);
}

#[test]
fn osc_check_auto_solves_and_reports_simplicity() {
    let out = ising(&["osc-check", "--model", "mobius", "--size", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["is_simple"], true);
    assert_eq!(v["ground_energy"], -20.0);
    assert_eq!(v["model"], "mobius");
}

#[test]
fn solve_flags_exhausted_budget_with_exit_three() {
    let out = ising(&[
        "solve", "--model", "sk", "--size", "24", "--dist", "gaussian", "--seed", "4",
        "--solver", "bnb", "--node-budget", "8",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let report = stdout_json(&out);
    assert_eq!(report["status"], "budget");
    assert!(report["gap"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_errors_exit_two() {
    let missing_size = ising(&["generate", "--model", "sk"]);
    assert_eq!(missing_size.status.code(), Some(2));
    let bad_dist = ising(&[
        "generate", "--model", "sk", "--size", "8", "--dist", "cauchy",
    ]);
    assert_eq!(bad_dist.status.code(), Some(2));
}

#[test]
fn solve_trace_csv_has_expected_header() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = ising(&[
        "solve", "--model", "sk", "--size", "30", "--dist", "gaussian", "--seed", "4",
        "--solver", "bnb", "--trace-out", path_str(&trace), "--out",
        path_str(&dir.path().join("r.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let body = std::fs::read_to_string(&trace).unwrap();
    assert!(body.starts_with("elapsed_s,gap,best_energy,lower_bound\n"));
    assert!(body.lines().count() > 1);
}

#[test]
fn ht_run_reaches_ladder_ground_from_every_start() {
    let out = ising(&[
        "ht-run", "--model", "mobius", "--size", "16", "--runs", "5", "--iters", "500",
        "--ground", "-20", "--seed", "9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["best_energy"], -20.0);
    assert_eq!(v["ground_hit_fraction"], 1.0);
}

#[test]
fn connectivity_csv_is_deterministic_across_runs() {
    let args = [
        "exp-connectivity", "--size", "8", "--ks", "2,7", "--instances-per-k", "4",
        "--seed", "1",
    ];
    let a = ising(&args);
    let b = ising(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("N,k,p_simple,"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn svg_output_is_wellformed() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("conn.svg");
    let out = ising(&[
        "exp-connectivity", "--size", "8", "--ks", "2,3", "--instances-per-k", "2",
        "--seed", "1", "--format", "svg", "--out", path_str(&svg),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let body = std::fs::read_to_string(&svg).unwrap();
    assert!(body.starts_with("<svg"));
    assert!(body.trim_end().ends_with("</svg>"));
}

#[test]
fn scaling_json_bundles_rows_with_fit() {
    let out = ising(&[
        "exp-scaling", "--sizes", "8,16", "--band-lo", "0.15", "--band-hi", "0.95",
        "--runs", "20", "--seed", "1", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert!(v["fit"]["slope"].is_f64());
}

#[test]
fn simple_fraction_accepts_spec_json() {
    let out = ising(&[
        "exp-simple-fraction", "--spec",
        r#"{"model":"sk","n":8,"dist":{"kind":"bimodal"}}"#,
        "--instances-per-point", "20", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("sk,bimodal,8,"), "{row}");
}

#[test]
fn rewire_fraction_flag_shuffles_generated_graph() {
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("plain.json");
    let mixed = dir.path().join("mixed.json");
    for (frac, path) in [("0.0", &plain), ("0.5", &mixed)] {
        let out = ising(&[
            "generate", "--model", "mobius", "--size", "20", "--seed", "5",
            "--rewire-frac", frac, "--out", path_str(path),
        ]);
        assert!(out.status.success());
    }
    let a = std::fs::read_to_string(&plain).unwrap();
    let b = std::fs::read_to_string(&mixed).unwrap();
    assert_ne!(a, b);
    let inst: serde_json::Value = serde_json::from_str(&b).unwrap();
    assert_eq!(inst["edges"].as_array().unwrap().len(), 30);
}
