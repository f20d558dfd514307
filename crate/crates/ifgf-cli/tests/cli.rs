//! End-to-end checks of the `ifgf` binary: exit codes, record formats, and
//! determinism of seeded runs.

use std::path::Path;
use std::process::{Command, Output};

fn ifgf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifgf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn jsonl_records(path: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(path)
        .expect("record file exists")
        .lines()
        .map(|line| serde_json::from_str(line).expect("valid json"))
        .collect()
}

#[test]
fn bench_dry_run_prints_resolved_config() {
    let out = ifgf(&["bench", "--dry-run", "--n", "64", "--ka", "4pi"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"geometry\": \"sphere\""));
    assert!(text.contains("\"n\": 64"));
    assert!(text.contains("\"ps\": 3"));
}

#[test]
fn bench_appends_jsonl_records_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.jsonl");
    for _ in 0..2 {
        let out = ifgf(&[
            "bench",
            "--n",
            "8",
            "--ka",
            "pi",
            "--subset",
            "128",
            "--coeffs",
            "random",
            "--seed",
            "42",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let records = jsonl_records(&path);
    assert_eq!(records.len(), 2);
    let first = &records[0];
    assert_eq!(first["schema_version"], 1);
    assert_eq!(first["command"], "bench");
    assert_eq!(first["n_points"], 384);
    assert_eq!(first["seed"], 42);
    assert!(first["eps_m"].as_f64().unwrap() <= 1e-3);
    assert!(first["t_acc_s"].as_f64().unwrap() > 0.0);
    assert!(first["levels"].as_array().unwrap().len() >= 3);
    assert_eq!(first["eps_m"], records[1]["eps_m"]);
}

#[test]
fn bench_csv_rows_match_the_documented_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.csv");
    for _ in 0..2 {
        let out = ifgf(&[
            "bench",
            "--n",
            "8",
            "--subset",
            "64",
            "--format",
            "csv",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "one header plus one row per run");
    assert!(lines[0].starts_with("schema_version,command,geometry"));
    let columns = lines[0].split(',').count();
    assert_eq!(lines[1].split(',').count(), columns);
    assert_eq!(lines[2].split(',').count(), columns);
}

#[test]
fn parallel_evaluation_matches_reference() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.jsonl");
    for threads in ["0", "2"] {
        let out = ifgf(&[
            "bench",
            "--n",
            "8",
            "--subset",
            "128",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let records = jsonl_records(&path);
    assert_eq!(records[0]["eps_m"], records[1]["eps_m"]);
}

#[test]
fn verify_passes_a_small_sphere() {
    let out = ifgf(&["verify", "--n", "16", "--ka", "pi"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("verify PASS"));
}

#[test]
fn verify_detects_corrupted_results() {
    let out = ifgf(&["verify", "--n", "8", "--ka", "pi", "--corrupt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("verify FAIL"));
}

#[test]
fn verify_refuses_clouds_over_the_cap() {
    let out = ifgf(&["verify", "--n", "64"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("capped at 8192"));
}

#[test]
fn verify_accepts_a_two_point_file_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pair.txt");
    std::fs::write(&path, "0 0 0 1 0\n3 0 0 1 0\n").unwrap();
    let out = ifgf(&[
        "verify",
        "--geometry",
        "file",
        "--input",
        path.to_str().unwrap(),
        "--ka",
        "1",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn gen_writes_a_cloud_the_file_geometry_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cloud.txt");
    let out = ifgf(&["gen", "--n", "4", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("wrote 96 points"));

    let out = ifgf(&[
        "bench",
        "--geometry",
        "file",
        "--input",
        path.to_str().unwrap(),
        "--ka",
        "1",
        "--subset",
        "96",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("96 points"));
}

#[test]
fn diag_factorization_emits_one_row_per_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fact.csv");
    let out = ifgf(&[
        "diag-factorization",
        "--kappa-h",
        "0,1",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9, "header plus two sizes times four strategies");
    assert!(lines[0].starts_with("schema_version,command,kappa_h,strategy"));
    for strategy in ["no-factorization", "exponential-only", "full-in-r", "full-in-s"] {
        assert_eq!(lines.iter().filter(|l| l.contains(strategy)).count(), 2);
    }
}

#[test]
fn diag_r_vs_s_emits_one_record_per_sweep_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.jsonl");
    let out = ifgf(&[
        "diag-r-vs-s",
        "--points",
        "4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let records = jsonl_records(&path);
    assert_eq!(records.len(), 4);
    for record in &records {
        assert_eq!(record["command"], "diag-r-vs-s");
        assert!(record["err_r"].as_f64().unwrap().is_finite());
        assert!(record["err_s"].as_f64().unwrap() <= 1e-3);
    }
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = ifgf(&["bench", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ka_conflicts_with_kappa0() {
    let out = ifgf(&["bench", "--ka", "1", "--kappa0"]);
    assert_eq!(out.status.code(), Some(2));
}
