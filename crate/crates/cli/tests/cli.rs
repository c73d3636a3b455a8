use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn freqlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqlab")).args(args).output().unwrap()
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn csv_files(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(root).unwrap() {
        let p = entry.unwrap().path();
        let csv = p.join("trace.csv");
        if csv.exists() {
            out.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(csv).unwrap()));
        }
    }
    out.sort();
    out
}

#[test]
fn presets_lists_catalog() {
    let o = freqlab(&["presets"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["coordinate-x1", "caloric-quadratic", "halfplane-pair"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn run_writes_trace_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = freqlab(&[
        "run",
        config_path("almgren-parabolic.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(out.join("trace.csv").exists());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "pass");
    assert_eq!(report["config"]["seed"], 3);
}

#[test]
fn failing_checks_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("strict");
    let cfg = config_path("almgren-parabolic.toml");
    let o = freqlab(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--tol-scale", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(out.join("report.json").exists());
}

#[test]
fn malformed_config_exits_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "kind = \"acf-parabolic\"\nspeed = 3\n[params]\nt = \"1:0.1:5 geom\"\nhorizon = -2\n").unwrap();
    let o = freqlab(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    for key in ["speed", "params.t", "params.horizon"] {
        assert!(err.contains(key), "{err}");
    }
    assert!(!out.exists());
}

#[test]
fn verify_all_quick_is_reproducible_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let o = freqlab(&["verify-all", "--quick", "--threads", threads, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
        runs.push(csv_files(&out));
    }
    assert_eq!(runs[0].len(), 12);
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[1], runs[2]);
}
