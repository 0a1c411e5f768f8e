//! End-to-end checks of the command-line interface.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dyncausal"))
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn simulate_writes_expected_shape_and_spec_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let result = bin()
        .args(["simulate", "--model", "b", "--seed", "1", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(result.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1025); // header + 1024 rows
    assert_eq!(lines[0], "x1,x2,x3");
    let spec: serde_json::Value = serde_json::from_slice(&result.stderr).unwrap();
    assert_eq!(spec["t_len"], 1024);
    assert_eq!(spec["n_nodes"], 3);
}

#[test]
fn simulate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a1.csv");
    let out2 = dir.path().join("a2.csv");
    for out in [&out1, &out2] {
        let status = bin()
            .args(["simulate", "--model", "a", "--T", "512", "--seed", "9", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(read(&out1), read(&out2));
    let text = std::fs::read_to_string(&out1).unwrap();
    assert_eq!(text.lines().count(), 513); // model a supports length override
}

#[test]
fn simulate_rejects_invalid_lengths() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let result = bin()
        .args(["simulate", "--model", "b", "--T", "511", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
    assert!(!result.stderr.is_empty());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let result = bin().args(["simulate", "--bogus"]).output().unwrap();
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn infer_rejects_rdp_on_non_power_of_two_input() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    bin()
        .args(["simulate", "--model", "a", "--T", "96", "--seed", "3", "--out"])
        .arg(&csv)
        .status()
        .unwrap();
    let result = bin()
        .args(["infer", "--method", "rdp", "--target", "x1", "--input"])
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&result.stderr);
    assert!(msg.contains("power of two"), "{msg}");
}

#[test]
fn infer_emits_document_and_norms() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    bin()
        .args(["simulate", "--model", "b", "--T", "128", "--seed", "5", "--out"])
        .arg(&csv)
        .status()
        .unwrap();
    let json_out = dir.path().join("net.json");
    let norms_out = dir.path().join("norms.csv");
    let result = bin()
        .args(["infer", "--method", "rdp", "--all", "--input"])
        .arg(&csv)
        .arg("--out")
        .arg(&json_out)
        .arg("--emit-norms")
        .arg(&norms_out)
        .output()
        .unwrap();
    assert!(
        result.status.code() == Some(0) || result.status.code() == Some(3),
        "{:?}",
        result
    );
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_out).unwrap()).unwrap();
    assert_eq!(doc["format_version"], 1);
    assert_eq!(doc["method"], "rdp");
    assert_eq!(doc["neighborhoods"].as_array().unwrap().len(), 3);
    let norms = std::fs::read_to_string(&norms_out).unwrap();
    assert!(norms.starts_with("time,target,source,norm\n"));
}

#[test]
fn infer_lambda_override_empties_edges() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    bin()
        .args(["simulate", "--model", "b", "--T", "128", "--seed", "7", "--out"])
        .arg(&csv)
        .status()
        .unwrap();
    let result = bin()
        .args([
            "infer", "--method", "rdp", "--target", "x1", "--lambda", "1e9", "--input",
        ])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(result.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    for hood in doc["neighborhoods"].as_array().unwrap() {
        for block in hood["blocks"].as_array().unwrap() {
            assert!(block["edges"].as_array().unwrap().is_empty());
        }
    }
}

#[test]
fn infer_reports_unknown_target() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    bin()
        .args(["simulate", "--model", "a", "--T", "64", "--seed", "2", "--out"])
        .arg(&csv)
        .status()
        .unwrap();
    let result = bin()
        .args(["infer", "--method", "rdp", "--target", "nope", "--input"])
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("nope"));
}

#[test]
fn study_reports_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("r1");
    let out2 = dir.path().join("r2");
    for (out, threads) in [(&out1, "1"), (&out2, "2")] {
        let result = bin()
            .args([
                "study", "--model", "b", "--method", "rdp", "--T", "256", "--trials", "8",
                "--seed", "11", "--threads", threads, "--out",
            ])
            .arg(out)
            .output()
            .unwrap();
        assert!(result.status.success(), "{result:?}");
        // summary table lands on stdout
        assert!(String::from_utf8_lossy(&result.stdout).contains("# change point"));
    }
    assert_eq!(
        read(&out1.with_extension("csv")),
        read(&out2.with_extension("csv"))
    );
    assert_eq!(
        read(&out1.with_extension("json")),
        read(&out2.with_extension("json"))
    );
}

#[test]
fn study_single_trial_degenerates_cleanly() {
    let result = bin()
        .args([
            "study", "--model", "a", "--method", "rdp", "--T", "128", "--trials", "1",
            "--seed", "3",
        ])
        .output()
        .unwrap();
    assert!(result.status.success());
    let text = String::from_utf8_lossy(&result.stdout);
    assert!(text.contains("trials 1"), "{text}");
}
