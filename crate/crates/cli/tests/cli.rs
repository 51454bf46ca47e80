use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "scenario,method,alpha,k,replications,mse,stderr,dropped";

fn acv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acv"))
        .args(args)
        .env_remove("ACV_WORKERS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(HEADER));
    lines.map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn minimal_config_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "minimal.json",
        r#"{
            "schema": 1,
            "scenario": "isotonic",
            "methods": [{ "method": "antithetic", "alpha": 0.01, "k": 2 }],
            "replications": 10,
            "oracle_fits": 200,
            "oracle_test_draws": 10
        }"#,
    );
    let out = dir.path().join("out.csv");
    let res = acv(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let table = rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(table.len(), 1);
    assert_eq!(table[0][..5], ["isotonic", "antithetic", "0.01", "2", "10"]);
    let summary = String::from_utf8(res.stdout).unwrap();
    assert!(summary.contains("rank") && summary.contains("antithetic"), "{summary}");
}

#[test]
fn csv_goes_to_stdout_without_destination() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "stdout.json",
        r#"{ "schema": 1, "scenario": "isotonic", "replications": 5, "oracle_fits": 50, "oracle_test_draws": 2,
             "methods": [{ "method": "sure" }, { "method": "kfold", "k": [2, 5] }] }"#,
    );
    let res = acv(&["run", "--config", &cfg, "--seed", "3", "--workers", "2"]);
    assert!(res.status.success());
    assert_eq!(rows(&String::from_utf8(res.stdout).unwrap()).len(), 3);
    assert!(String::from_utf8(res.stderr).unwrap().contains("oracle prediction error"));
}

#[test]
fn output_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "workers.json",
        r#"{ "schema": 1, "scenario": "logistic", "replications": 20, "oracle_fits": 40, "oracle_test_draws": 5,
             "methods": [{ "method": "antithetic", "alpha": 0.1, "k": 10 }, { "method": "kfold", "k": 10 }] }"#,
    );
    let one = acv(&["run", "--config", &cfg, "--workers", "1"]);
    let three = acv(&["run", "--config", &cfg, "--workers", "3"]);
    assert!(one.status.success() && three.status.success());
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn isotonic_comparison_ranks_antithetic_first() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "isotonic.json",
        r#"{
            "schema": 1,
            "scenario": "isotonic",
            "methods": [
                { "method": "kfold", "k": [2, 100] },
                { "method": "antithetic", "alpha": 0.01, "k": 2 }
            ],
            "replications": 1000,
            "seed": 2024
        }"#,
    );
    let out = dir.path().join("isotonic.csv");
    let res = acv(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let table = rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(table.len(), 3);
    let best = table
        .iter()
        .min_by(|a, b| a[5].parse::<f64>().unwrap().total_cmp(&b[5].parse::<f64>().unwrap()))
        .unwrap();
    assert_eq!(best[1], "antithetic");
}

#[test]
fn negative_alpha_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{ "schema": 1, "scenario": "isotonic", "methods": [{ "method": "antithetic", "alpha": -1, "k": 2 }] }"#,
    );
    let res = acv(&["run", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8(res.stderr).unwrap();
    assert!(err.contains("methods[0].alpha"), "{err}");
}

#[test]
fn syntax_error_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "broken.json", "{\n  \"schema\": 1,\n  oops\n}");
    let res = acv(&["run", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8(res.stderr).unwrap().contains("line 3"));
}

#[test]
fn missing_config_and_bad_flags_exit_2() {
    assert_eq!(acv(&["run", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(acv(&["run"]).status.code(), Some(2));
    assert_eq!(acv(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn bad_worker_env_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "env.json",
        r#"{ "schema": 1, "scenario": "isotonic", "replications": 2, "methods": [{ "method": "sure" }] }"#,
    );
    let res = Command::new(env!("CARGO_BIN_EXE_acv"))
        .args(["run", "--config", &cfg])
        .env("ACV_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8(res.stderr).unwrap().contains("ACV_WORKERS"));
}

#[test]
fn unknown_suite_exits_2() {
    let res = acv(&["verify", "nonsense"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8(res.stderr).unwrap().contains("sampler"));
}

#[test]
fn sampler_suite_passes() {
    let res = acv(&["verify", "sampler"]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.contains("PASS zero-sum residual"), "{text}");
    assert!(text.contains("cross-covariance"));
    assert!(!text.contains("FAIL"));
}
