//! End-to-end tests of the `mstnet` binary.

use std::path::Path;
use std::process::{Command, Output};

fn mstnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mstnet"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn generate_fit_predict_cv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = mstnet(
        dir.path(),
        &[
            "generate",
            "--shapes",
            "spiral:2,star:1",
            "--n",
            "40",
            "--overlap",
            "0.05",
            "--seed",
            "3",
            "--out",
            "data.csv",
        ],
    );
    assert_success(&out);
    let csv = std::fs::read_to_string(dir.path().join("data.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 120);
    assert!(csv.lines().next().unwrap().ends_with(",class"));

    let out = mstnet(
        dir.path(),
        &[
            "fit",
            "--data",
            "data.csv",
            "--label-col",
            "class",
            "--theta",
            "0.8",
            "--out",
            "model.json",
        ],
    );
    assert_success(&out);

    let out = mstnet(
        dir.path(),
        &[
            "predict",
            "--model",
            "model.json",
            "--data",
            "data.csv",
            "--label-col",
            "class",
            "--out",
            "preds.csv",
        ],
    );
    assert_success(&out);
    let preds = std::fs::read_to_string(dir.path().join("preds.csv")).unwrap();
    assert_eq!(preds.lines().count(), 1 + 120);
    assert!(preds.starts_with("row,predicted,delta_0,delta_1,delta_2"));

    let out = mstnet(
        dir.path(),
        &[
            "cv",
            "--data",
            "data.csv",
            "--label-col",
            "class",
            "--k",
            "5",
            "--optimizer",
            "none",
            "--seed",
            "3",
            "--out",
            "report",
        ],
    );
    assert_success(&out);
    let tabular = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    // header plus 5 folds x (Proposal + 1nn)
    assert_eq!(tabular.lines().count(), 1 + 10);
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn cv_defaults_echo_theta_and_k() {
    let dir = tempfile::tempdir().unwrap();
    let out = mstnet(
        dir.path(),
        &[
            "cv",
            "--shapes",
            "spiral:2",
            "--n",
            "30",
            "--overlap",
            "0",
            "--out",
            "report",
        ],
    );
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let config_line = stdout.lines().next().unwrap();
    let parsed: serde_json::Value = serde_json::from_str(config_line).unwrap();
    assert_eq!(parsed["effective_config"]["theta"], 0.8);
    assert_eq!(parsed["effective_config"]["k"], 10);
}

#[test]
fn single_class_data_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("single.csv"), "a,class\n1,0\n2,0\n").unwrap();
    let out = mstnet(
        dir.path(),
        &[
            "fit",
            "--data",
            "single.csv",
            "--label-col",
            "class",
            "--out",
            "model.json",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("single class"), "stderr: {stderr}");
}

#[test]
fn unknown_flag_fails_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = mstnet(dir.path(), &["cv", "--data", "x.csv", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_invocations_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = mstnet(
            dir.path(),
            &[
                "generate", "--shapes", "star:2", "--n", "25", "--overlap", "0.3", "--seed", "11",
                "--out", name,
            ],
        );
        assert_success(&out);
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn report_compares_against_baseline() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&mstnet(
        dir.path(),
        &[
            "generate", "--shapes", "spiral:2", "--n", "30", "--overlap", "0.2", "--seed", "5",
            "--out", "d.csv",
        ],
    ));
    assert_success(&mstnet(
        dir.path(),
        &[
            "cv", "--data", "d.csv", "--label-col", "class", "--k", "3", "--optimizer", "none",
            "--seed", "5", "--out", "base",
        ],
    ));
    std::fs::write(
        dir.path().join("grid.cfg"),
        "grid_values = 0.5, 1.0\nmax_evaluations = 16\n",
    )
    .unwrap();
    assert_success(&mstnet(
        dir.path(),
        &[
            "cv", "--data", "d.csv", "--label-col", "class", "--k", "3", "--optimizer", "grid",
            "--grid-config", "grid.cfg", "--seed", "5", "--out", "opt",
        ],
    ));
    let out = mstnet(
        dir.path(),
        &[
            "report",
            "--input",
            "opt.json",
            "--baseline",
            "base.json",
            "--out",
            "cmp.json",
        ],
    );
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("mean improvement"), "stdout: {stdout}");
    assert!(dir.path().join("cmp.json").exists());
}

#[test]
fn version_prints_semver() {
    let dir = tempfile::tempdir().unwrap();
    let out = mstnet(dir.path(), &["--version"]);
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.trim().starts_with("mstnet 0.1"), "stdout: {stdout}");
}
