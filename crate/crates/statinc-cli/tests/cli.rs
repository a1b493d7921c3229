//! End-to-end tests of the binary: report content, determinism, exit
//! codes, and grid emission.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_statinc")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn")
}

fn golden_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        r#"{
  "schema_version": 1,
  "task": "interpolate",
  "increment": { "n": 1, "mu": 1, "gap_end": 1 },
  "functional": [2.0, 1.0],
  "signal_density": {
    "kind": "increment-rational",
    "numerator": [1.0],
    "denominator": [1.0, 0.5]
  }
}"#,
    )
    .unwrap();
    path
}

fn series_file(dir: &Path) -> PathBuf {
    let path = dir.join("series.csv");
    std::fs::write(&path, "t,value\n-2,1.0\n-1,2.0\n2,3.0\n3,4.0\n").unwrap();
    path
}

#[test]
fn golden_run_produces_expected_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = golden_config(dir.path());
    let series = series_file(dir.path());
    let out = dir.path().join("out");
    let result = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--series",
        series.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{result:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let results = &report["results"];
    assert_eq!(results["mse_rational"], "616/85");
    assert_eq!(results["increment_weights_rational"]["-1"], "-106/85");
    assert_eq!(results["increment_weights_rational"]["3"], "-4/85");
    assert_eq!(results["time_domain_weights_rational"]["-1"], "149/85");
    assert_eq!(results["estimate_rational"], "80/17"); // = 400/85
    assert_eq!(report["task"], "interpolate");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = golden_config(dir.path());
    let series = series_file(dir.path());
    let mut bodies = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let result = run(&[
            "--config",
            cfg.to_str().unwrap(),
            "--series",
            series.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(result.status.success());
        bodies.push(std::fs::read(out.join("report.json")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn validation_error_exits_2_with_error_block() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    // empty functional: rejected before any numerics
    std::fs::write(
        &path,
        r#"{
  "schema_version": 1,
  "task": "interpolate",
  "increment": { "n": 1, "mu": 1, "gap_end": 1 },
  "functional": [],
  "signal_density": { "kind": "constant", "value": 1.0 }
}"#,
    )
    .unwrap();
    let result = run(&["--config", path.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    let stdout = String::from_utf8(result.stdout).unwrap();
    let block: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(block["error"]["code"], 2);
    assert_eq!(block["error"]["kind"], "validation");
}

#[test]
fn numerical_error_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("divergent.json");
    // grid density vanishing on a band: minimality fails
    let zeros: Vec<f64> = (0..512)
        .map(|j| if (200..300).contains(&j) { 0.0 } else { 1.0 })
        .collect();
    let cfg = serde_json::json!({
        "schema_version": 1,
        "task": "interpolate",
        "increment": { "n": 1, "mu": 1, "gap_end": 0 },
        "functional": [1.0],
        "signal_density": { "kind": "grid", "values": zeros }
    });
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let result = run(&["--config", path.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(3));
    let block: serde_json::Value =
        serde_json::from_str(&String::from_utf8(result.stdout).unwrap()).unwrap();
    assert_eq!(block["error"]["kind"], "numerical");
}

#[test]
fn io_error_exits_4() {
    let result = run(&["--config", "/nonexistent/statinc.json"]);
    assert_eq!(result.status.code(), Some(4));
}

#[test]
fn grid_out_emits_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = golden_config(dir.path());
    let out = dir.path().join("out");
    let result = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--grid-out",
    ]);
    assert!(result.status.success());
    let grid = std::fs::read_to_string(out.join("characteristic.csv")).unwrap();
    let mut lines = grid.lines();
    assert_eq!(lines.next().unwrap(), "lambda,f,g,h_abs,h_arg");
    let first = lines.next().unwrap();
    assert_eq!(first.split(',').count(), 5);
}

#[test]
fn verify_task_flags_inconsistent_reference() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.json");
    std::fs::write(
        &path,
        r#"{
  "schema_version": 1,
  "task": "verify",
  "increment": { "n": 1, "mu": 1, "gap_end": 1 },
  "functional": [2.0, 1.0],
  "signal_density": {
    "kind": "increment-rational",
    "numerator": [1.0],
    "denominator": [1.0, 0.5]
  },
  "reference_mse": 5.176470588235294,
  "options": { "oracle_window": 10 }
}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let result = run(&["--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(result.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let results = &report["results"];
    // solver and oracle agree with each other…
    assert_eq!(results["consistent"], true);
    // …and both disagree with the externally quoted value, which the
    // report must call out
    assert_eq!(results["reference_mse_consistent"], false);
    assert!(results["notes"][0].as_str().unwrap().contains("disagrees")
        || results["notes"][0].as_str().unwrap().contains("disagree"));
    assert_eq!(results["oracle"]["mse_rational"], "616/85");
}

#[test]
fn report_config_echo_round_trips() {
    // the echoed config block must re-run to the same report
    let dir = tempfile::tempdir().unwrap();
    let cfg = golden_config(dir.path());
    let out1 = dir.path().join("first");
    assert!(run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out1.to_str().unwrap(),
    ])
    .status
    .success());
    let report1 = std::fs::read_to_string(out1.join("report.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&report1).unwrap();

    let cfg2 = dir.path().join("echoed.json");
    std::fs::write(&cfg2, serde_json::to_string(&parsed["config"]).unwrap()).unwrap();
    let out2 = dir.path().join("second");
    assert!(run(&[
        "--config",
        cfg2.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
    ])
    .status
    .success());
    let report2 = std::fs::read_to_string(out2.join("report.json")).unwrap();
    assert_eq!(report1, report2);
}

#[test]
fn series_into_gap_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = golden_config(dir.path());
    let series = dir.path().join("series.csv");
    std::fs::write(&series, "t,value\n0,1.0\n").unwrap();
    let result = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--series",
        series.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(2));
}
