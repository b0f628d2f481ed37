//! End-to-end tests of the `ripple-sim` binary: subcommands, config
//! parsing, output schemas, exit codes, and worker-count determinism.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ripple-sim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmp_path(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn chern_defaults_to_stdout_csv() {
    let out = run(&["chern"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "d2_ratio,chern,est_error");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 21);
    let first: Vec<f64> = rows[0].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 1.0).abs() < 1e-3);
    let last: Vec<f64> = rows[20].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 2.0);
    assert!(last[1].abs() < 1e-3);
}

#[test]
fn config_file_drives_the_sweep() {
    let config_path = tmp_path("chern_config.json");
    let out_path = tmp_path("chern_config_out.csv");
    fs::write(
        &config_path,
        format!(
            r#"{{
  "delta1": 30.0,
  "omega1": 15.0,
  "units": "2pi_mhz",
  "grid": {{ "axis": "d2_ratio", "min": 0.0, "max": 2.0, "count": 5 }},
  "output": {{ "path": "{}", "format": "csv" }},
  "workers": 2
}}"#,
            out_path.display()
        ),
    )
    .unwrap();
    let out = run(&["chern", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("d2_ratio,chern,est_error\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let config_path = tmp_path("bad_key.json");
    fs::write(&config_path, r#"{ "delta": 1.0 }"#).unwrap();
    let out = run(&["chern", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config"));
}

#[test]
fn malformed_grid_is_a_config_error() {
    let config_path = tmp_path("bad_grid.json");
    fs::write(
        &config_path,
        r#"{ "grid": { "axis": "d2_ratio", "min": 2.0, "max": 0.0, "count": 5 } }"#,
    )
    .unwrap();
    let out = run(&["chern", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = run(&["chern", "--out", "/nonexistent-dir/rows.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn fidelity_sweep_schema() {
    let out = run(&[
        "fidelity-sweep",
        "--ramp-time",
        "20",
        "--steps",
        "200",
        "--workers",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("d2_ratio,fidelity\n"));
    assert_eq!(text.lines().count(), 82);
}

#[test]
fn ramp_trajectory_schema() {
    let out = run(&["ramp", "--ramp-time", "10", "--steps", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("t,theta,re_a,im_a,re_b,im_b,sigma_y\n"));
    assert_eq!(text.lines().count(), 102);
    // the state stays normalized in the emitted rows
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let norm = (v[2] * v[2] + v[3] * v[3] + v[4] * v[4] + v[5] * v[5]).sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
    }
}

#[test]
fn curvature_rows_tag_degeneracies() {
    let out = run(&[
        "curvature",
        "--d2-ratio",
        "1.0",
        "--ramp-time",
        "20",
        "--steps",
        "200",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("theta,F_closed,F_spectral,F_dynamic,error\n"));
    let last = text.lines().last().unwrap();
    assert!(last.contains("near degeneracy"), "last row: {last}");
}

#[test]
fn json_output_parses() {
    let out = run(&["chern", "--format", "json", "--nodes", "101"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 21);
    assert!(doc["metadata"]["spec"]["nodes"].as_u64().unwrap() == 101);
}

#[test]
fn worker_count_does_not_change_bytes() {
    let p1 = tmp_path("det_w1.csv");
    let p8 = tmp_path("det_w8.csv");
    let out = run(&["chern", "--workers", "1", "--out", p1.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["chern", "--workers", "8", "--out", p8.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read(&p1).unwrap(), fs::read(&p8).unwrap());
}

#[test]
fn validate_passes_and_reports_per_check() {
    let out = run(&["validate", "--ramp-time", "500", "--steps", "5000", "--nodes", "501"]);
    let text = stdout(&out);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout:\n{text}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(text.contains("PASS chern quantization"));
    assert!(text.contains("PASS sweep determinism"));
    assert!(text.contains("est_error"));
    assert!(text.contains("19/19 checks passed"));
}

#[test]
fn validate_fails_with_nodes_below_minimum() {
    let out = run(&["validate", "--ramp-time", "500", "--steps", "5000", "--nodes", "99"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("FAIL chern quantization"));
}

#[test]
fn help_exits_cleanly() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    for sub in ["curvature", "chern", "fidelity-sweep", "ramp", "validate"] {
        assert!(stdout(&out).contains(sub));
    }
}
