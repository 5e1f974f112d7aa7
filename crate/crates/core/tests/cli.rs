//! CLI error handling and output-shape checks, run against the real binary.

use std::process::Command;

fn crowdest(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_crowdest")).args(args).output().unwrap()
}

#[test]
fn missing_input_file_fails_with_message() {
    let out = crowdest(&["estimate", "--input", "/nonexistent/stream.csv", "--output", "/tmp/x"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("cannot read"), "stderr: {stderr}");
}

#[test]
fn malformed_csv_fails_with_row_number() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    std::fs::write(&input, "hit_index,worker_id,answer\n0,w1,a\nnope,w2,b\n").unwrap();
    let out = crowdest(&[
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("row 2"), "stderr: {stderr}");
}

#[test]
fn unknown_flag_fails() {
    let out = crowdest(&["estimate", "--bogus"]);
    assert!(!out.status.success());
}

#[test]
fn heuristic_without_seed_fails() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("s.csv");
    std::fs::write(&input, "hit_index,worker_id,answer\n0,w1,a\n1,w1,b\n").unwrap();
    let out = crowdest(&[
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path().to_str().unwrap(),
        "--heuristic",
        "cluster",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn overdrawn_simulation_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = crowdest(&[
        "simulate", "--n-items", "10", "--workers", "1", "--hits", "50", "--seed", "1",
        "--output", dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("without-replacement"));
}

#[test]
fn replay_emits_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    crowdest(&[
        "simulate", "--dist", "zipf", "--n-items", "300", "--workers", "10", "--hits", "200",
        "--seed", "3", "--output", dir.path().to_str().unwrap(),
    ]);
    let stream = dir.path().join("stream.csv");
    let out = crowdest(&["replay", "--input", stream.to_str().unwrap(), "--step", "50"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = stdout.lines().collect();
    // Header plus exactly n/step data rows.
    assert_eq!(rows.len(), 5, "stdout: {stdout}");
    assert!(rows[0].starts_with("hits,unique,f1_ratio"));
    assert!(rows[1].starts_with("50,"));
    assert!(rows[4].starts_with("200,"));
}

#[test]
fn simulate_estimate_pipeline_recovers_uniform_cardinality() {
    let dir = tempfile::tempdir().unwrap();
    let sim = crowdest(&[
        "simulate", "--dist", "uniform", "--n-items", "50", "--workers", "10", "--hits",
        "400", "--worker-skew", "fixed", "--with-replacement", "--seed", "12", "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert!(sim.status.success(), "{}", String::from_utf8_lossy(&sim.stderr));
    let stream = dir.path().join("stream.csv");
    let est = crowdest(&[
        "estimate", "--input", stream.to_str().unwrap(), "--output",
        dir.path().to_str().unwrap(), "--step", "100", "--estimators", "chao92",
    ]);
    assert!(est.status.success(), "{}", String::from_utf8_lossy(&est.stderr));
    let series = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    let last = series.lines().last().unwrap();
    let chao92: f64 = last.split(',').nth(3).unwrap().parse().unwrap();
    assert!((chao92 - 50.0).abs() <= 5.0, "final chao92 {chao92} (row: {last})");
}
