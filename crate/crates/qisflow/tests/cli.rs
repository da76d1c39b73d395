//! End-to-end checks of the command-line interface: exit codes, error
//! reporting, and output files, driven through the compiled binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("qisflow-cli-{}-{name}", std::process::id()))
}

fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qisflow"))
        .args(args)
        .output()
        .expect("binary should execute")
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let path = scratch(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn malformed_json_exits_with_config_error() {
    let path = write_config("malformed.json", "{ not json");
    let out = run_cli(&["run", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("config error"), "stderr: {stderr}");
}

#[test]
fn missing_file_exits_with_config_error() {
    let out = run_cli(&["run", "/nonexistent/qisflow.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_length_mismatch_names_the_field() {
    let path = write_config(
        "mismatch.json",
        r#"{"experiment": "sphere-flow", "m": 3, "c": [1.0, 2.0]}"#,
    );
    let out = run_cli(&["run", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("`c`"), "stderr: {stderr}");
    assert!(stderr.contains("length mismatch"), "stderr: {stderr}");
}

#[test]
fn unknown_experiment_exits_with_config_error() {
    let path = write_config(
        "unknown.json",
        r#"{"experiment": "warp-drive", "m": 2, "c": [1.0, 2.0]}"#,
    );
    let out = run_cli(&["run", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn impossible_threshold_fails_the_run() {
    let path = write_config(
        "forced-failure.json",
        r#"{"experiment": "sphere-flow", "m": 2, "c": [2.0, 1.0], "seed": 3,
            "integrator": {"t_max": 0.5},
            "thresholds": {"norm_drift": 0.0}}"#,
    );
    let out = run_cli(&["run", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL"), "stdout: {stdout}");
}

#[test]
fn successful_run_writes_the_output_file() {
    let config_path = scratch("success.json");
    let output_path = scratch("success.csv");
    let body = format!(
        r#"{{"experiment": "sphere-flow", "m": 2, "c": [2.0, 1.0], "seed": 3,
            "integrator": {{"t_max": 0.5, "sample_stride": 50}},
            "output_path": {:?}}}"#,
        output_path.to_str().unwrap()
    );
    std::fs::write(&config_path, body).unwrap();
    let out = run_cli(&["run", config_path.to_str().unwrap()]);
    let written = std::fs::read_to_string(&output_path).unwrap();
    std::fs::remove_file(&config_path).ok();
    std::fs::remove_file(&output_path).ok();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS"), "stdout: {stdout}");
    assert!(written.starts_with("t,w1,w2,norm_err,potential\n"));
}

#[test]
fn format_and_output_flags_override_the_config() {
    let config_path = scratch("override.json");
    let output_path = scratch("override.out");
    let body = r#"{"experiment": "qis-flow", "m": 2, "c": [2.0, 1.0], "seed": 3,
                   "integrator": {"t_max": 0.2, "sample_stride": 50}}"#;
    std::fs::write(&config_path, body).unwrap();
    let out = run_cli(&[
        "run",
        config_path.to_str().unwrap(),
        "--output",
        output_path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let written = std::fs::read_to_string(&output_path).unwrap();
    std::fs::remove_file(&config_path).ok();
    std::fs::remove_file(&output_path).ok();
    assert_eq!(out.status.code(), Some(0));
    assert!(written.trim_start().starts_with('{'), "not JSON: {written}");
    assert!(written.contains("\"trajectory\""));
}

#[test]
fn seed_flag_changes_random_initial_conditions() {
    let config_path = scratch("seeded.json");
    let body = r#"{"experiment": "sphere-flow", "m": 3, "c": [3.0, 2.0, 1.0],
                   "integrator": {"t_max": 0.1, "sample_stride": 100}}"#;
    std::fs::write(&config_path, body).unwrap();
    let first = run_cli(&["run", config_path.to_str().unwrap(), "--seed", "7"]);
    let second = run_cli(&["run", config_path.to_str().unwrap(), "--seed", "8"]);
    let again = run_cli(&["run", config_path.to_str().unwrap(), "--seed", "7"]);
    std::fs::remove_file(&config_path).ok();
    assert_eq!(first.status.code(), Some(0));
    assert_ne!(first.stdout, second.stdout, "seed must steer the run");
    assert_eq!(first.stdout, again.stdout, "equal seeds must reproduce");
}

#[test]
fn verify_subcommand_passes() {
    let out = run_cli(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("all checks passed"), "stdout: {stdout}");
    assert!(
        stdout.contains("replicator_benchmark_sphere"),
        "stdout: {stdout}"
    );
}
