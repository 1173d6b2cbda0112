//! End-to-end checks of the `eik` binary: exit codes, config validation
//! messages, summary lines, and output determinism.

use std::path::Path;
use std::process::{Command, Output};

fn eik(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eik"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn spin_demo_reports_worked_example_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spin.json");
    write(
        &cfg,
        r#"{"a": 0.75, "b": 0.25, "c": [0.0, 1.0, 0.0, 0.0], "target": 0.9}"#,
    );
    let csv = dir.path().join("spin.csv");
    let out = eik(&[
        "spin-demo",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let summary = stdout(&out);
    assert!(summary.contains("alpha ≈ 1.70"), "summary: {summary}");
    assert!(
        summary.contains("0.6452") && summary.contains("0.4500"),
        "summary: {summary}"
    );
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("alpha,i,j,re,im"));
}

#[test]
fn ed_sim_writes_density_series_and_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ed.json");
    write(
        &cfg,
        r#"{
            "grid": {"n_points": 64, "dx": 0.25, "origin": -8.0},
            "params": {"dt": 0.005},
            "initial_state": {"kind": "gaussian", "x0": 0.0, "sigma": 1.0, "p0": 0.3},
            "n_steps": 40,
            "output_every": 10
        }"#,
    );
    let csv = dir.path().join("ed.csv");
    let out = eik(&[
        "ed-sim",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("max_fp_se_l1_deviation"));
    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,l1_deviation,x_0"));
    // 0,10,20,30,40 recorded.
    assert_eq!(lines.count(), 5);
}

#[test]
fn malformed_json_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    write(&cfg, "{this is not json");
    let csv = dir.path().join("never.csv");
    let out = eik(&[
        "qbr",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("config invalid"));
    assert!(
        !csv.exists(),
        "no output file may be written on config errors"
    );
}

#[test]
fn missing_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("nokraus.json");
    write(
        &cfg,
        r#"{"prior": {"dim":2,"re":[[0.5,0],[0,0.5]],"im":[[0,0],[0,0]]}, "detected": 0}"#,
    );
    let out = eik(&["qbr", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kraus"), "stderr: {}", stderr(&out));
}

#[test]
fn negative_delta_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("weak.json");
    write(
        &cfg,
        r#"{
            "amplitudes": [[0.7071067811865476,0],[0.7071067811865476,0]],
            "eigenvalues": [1.0,-1.0],
            "delta": -1.0,
            "postselection": [[1.0,0],[0.0,0]],
            "n_samples": 100
        }"#,
    );
    let out = eik(&["weak-demo", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`delta`"), "stderr: {}", stderr(&out));
}

#[test]
fn module_errors_exit_1_with_single_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("die7.json");
    write(
        &cfg,
        r#"{
            "prior": [0.16666666666666666,0.16666666666666666,0.16666666666666666,
                      0.16666666666666666,0.16666666666666666,0.16666666666666669],
            "constraints": [{"observable": [1,2,3,4,5,6], "target": 7.0}]
        }"#,
    );
    let out = eik(&["classical-maxent", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert_eq!(err.trim().lines().count(), 1, "single-line error: {err}");
    assert!(err.contains("infeasible"));
}

#[test]
fn same_config_and_seed_give_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("weak.json");
    write(
        &cfg,
        r#"{
            "amplitudes": [[0.7071067811865476,0],[0.7071067811865476,0]],
            "eigenvalues": [1.0,-1.0],
            "delta": 6.0,
            "postselection": [[0.3090169943749474,0],[0.9510565162951535,0]],
            "n_samples": 2000
        }"#,
    );
    let csv1 = dir.path().join("a.csv");
    let csv2 = dir.path().join("b.csv");
    for (csv, _) in [(&csv1, 0), (&csv2, 1)] {
        let out = eik(&[
            "weak-demo",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "424242",
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    let a = std::fs::read(&csv1).unwrap();
    let b = std::fs::read(&csv2).unwrap();
    assert_eq!(a, b, "same config + same seed must give byte-identical CSV");
}

#[test]
fn qbr_summary_reports_outcome_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("qbr.json");
    write(
        &cfg,
        r#"{
            "prior": {"dim":2, "re": [[0.5,0],[0,0.5]], "im": [[0,0],[0,0]]},
            "kraus": [
                {"dim":2,"re":[[0.8660254037844386,0],[0,0.5]],"im":[[0,0],[0,0]]},
                {"dim":2,"re":[[0.5,0],[0,0.8660254037844386]],"im":[[0,0],[0,0]]}
            ],
            "detected": 0
        }"#,
    );
    let csv = dir.path().join("qbr.csv");
    let out = eik(&[
        "qbr",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("outcome_probabilities"));
    let table = std::fs::read_to_string(&csv).unwrap();
    // Posterior diag(0.75, 0.25) from the sqrt-POVM blocks.
    assert!(table.contains("0,0,0.75"), "table: {table}");
    assert!(table.contains("1,1,0.25"), "table: {table}");
}
