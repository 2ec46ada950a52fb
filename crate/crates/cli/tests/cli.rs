//! End-to-end runs of the `cwf` binary.

use std::path::Path;
use std::process::{Command, Output};

fn cwf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cwf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn thm1_single_point_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"powers_db": [0], "payload_bits": [1000]}"#);
    let out = dir.path().join("out.csv");
    let o = cwf(&["thm1", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# cwf "));
    assert!(text.contains("# config_sha256: "));
    assert!(text.contains("10^(dB/10)"));
    assert_eq!(data_rows(&text).len(), 1);
}

#[test]
fn simulated_sweep_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"kind": "thm1_sweep", "powers_db": [0, 5], "payload_bits": [100, 300], "simulate": true, "trials": 50}"#,
    );
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = cwf(&["thm1", "--config", &cfg, "--seed", "7", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn stdout_is_the_default_sink() {
    let o = cwf(&["queue"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("t_sub"));
    assert_eq!(data_rows(&text).len(), 20);
}

#[test]
fn missing_seed_is_a_config_error() {
    let o = cwf(&["waterfill"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn bad_config_file_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"powers_db": "loud"}"#);
    assert_eq!(cwf(&["thm1", "--config", &cfg]).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(cwf(&["thm1", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    let wrong_kind = write_config(dir.path(), "k.json", r#"{"kind": "fading_sweep"}"#);
    assert_eq!(cwf(&["thm1", "--config", &wrong_kind]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_two() {
    let o = cwf(&["thm1", "--out", "/nonexistent-dir/out.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fading_and_waterfill_sweeps_run() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_config(dir.path(), "f.json", r#"{"powers_db": [0, 10], "s_counts": [2, 3]}"#);
    let o = cwf(&["fading", "--config", &f]);
    assert!(o.status.success());
    assert_eq!(data_rows(&String::from_utf8(o.stdout).unwrap()).len(), 2 * (2 + 3));
    let w = write_config(dir.path(), "w.json", r#"{"powers_db": [10], "s_counts": [4], "samples": 5000}"#);
    let o = cwf(&["waterfill", "--config", &w, "--seed", "3"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].ends_with(",ok"));
}
