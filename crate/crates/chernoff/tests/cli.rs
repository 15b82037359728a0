//! End-to-end checks of the `chernoff` binary: exit codes, report files, and
//! the config-file path.

use std::io::Write;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chernoff"))
}

#[test]
fn diagnose_example1_succeeds() {
    let out = bin()
        .args(["diagnose", "--env", "example1"])
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("stdout is a JSON report");
    let d1 = report["constants"]["d1"].as_f64().unwrap();
    assert!((d1 - 4e-6).abs() < 1e-9);
}

#[test]
fn config_errors_exit_2() {
    let out = bin()
        .args(["test", "--env", "no_such_env"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["test", "--env", "example1", "--delta", "1.5"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["test", "--env", "example1", "--policies", "bogus"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let out = bin()
        .args(["regress", "--csv", "/nonexistent/data.csv", "--target", "y"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn test_command_writes_report_and_tidy_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = bin()
        .args([
            "test",
            "--env",
            "example1",
            "--policies",
            "uniform",
            "--trials",
            "5",
            "--seed",
            "3",
            "--format",
            "csv",
            "--out",
        ])
        .arg(&out_path)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["testing"][0]["policy"], "uniform");
    assert_eq!(report["testing"][0]["trials"], 5);
    let csv_text = std::fs::read_to_string(out_path.with_extension("csv")).unwrap();
    let mut lines = csv_text.lines();
    assert_eq!(lines.next().unwrap(), "policy,trial,metric,checkpoint,value");
    // 5 trials x 2 metrics.
    assert_eq!(lines.count(), 10);
}

#[test]
fn json_config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    let out_path = dir.path().join("report.json");
    let mut f = std::fs::File::create(&cfg_path).unwrap();
    write!(
        f,
        r#"{{
            "env": {{ "kind": "three_group", "seed": 2 }},
            "policies": ["top2", "uniform"],
            "delta": 0.1,
            "trials": 6,
            "master_seed": 11,
            "out": {out:?}
        }}"#,
        out = out_path.to_string_lossy()
    )
    .unwrap();
    let out = bin()
        .args(["test", "--config"])
        .arg(&cfg_path)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["testing"].as_array().unwrap().len(), 2);
    assert_eq!(report["testing"][0]["policy"], "top2");
}

#[test]
fn design_command_on_means_csv() {
    let dir = tempfile::tempdir().unwrap();
    let means_path = dir.path().join("means.csv");
    // Example-1 table.
    std::fs::write(
        &means_path,
        "h0,h1,h2\n1.0,0.001,0.0\n1.0,1.002,0.998\n",
    )
    .unwrap();
    let out = bin()
        .args(["design", "--hyp", "0", "--means-csv"])
        .arg(&means_path)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let probs = report["design"]["probs"].as_array().unwrap();
    assert!((probs[0].as_f64().unwrap() - 1.0).abs() < 1e-9);
}
