use std::path::Path;

use freqlab::harness::{quick_config, run_experiment, ExperimentConfig, ExperimentKind, RunOptions, RunReport};
use freqlab::Error;

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/run_report.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn opts(dir: &Path) -> RunOptions {
    RunOptions { out: Some(dir.to_path_buf()), ..RunOptions::default() }
}

fn validate(report: &RunReport, dir: &Path) {
    let v = schema();
    let on_disk: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    let errs: Vec<String> = v.iter_errors(&on_disk).map(|e| e.to_string()).collect();
    assert!(errs.is_empty(), "{}: {errs:?}", report.kind);
}

#[test]
fn every_quick_experiment_passes_and_matches_schema() {
    let root = tempfile::tempdir().unwrap();
    for kind in ExperimentKind::ALL {
        let dir = root.path().join(kind.name());
        let report = run_experiment(&quick_config(kind), &opts(&dir)).unwrap_or_else(|e| panic!("{kind}: {e}"));
        let failed: Vec<_> = report.failed_checks().map(|c| format!("{} = {}", c.name, c.value)).collect();
        assert!(report.passed(), "{kind}: {failed:?}");
        assert!(dir.join("trace.csv").exists());
        validate(&report, &dir);
    }
}

#[test]
fn failing_report_still_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick_config(ExperimentKind::AcfElliptic);
    cfg.tolerances.insert("closed_form".into(), 1e-300);
    let report = run_experiment(&cfg, &opts(dir.path())).unwrap();
    assert!(!report.passed());
    validate(&report, dir.path());
}

#[test]
fn coordinate_trace_is_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml_str(
        r#"
        kind = "almgren-parabolic"
        [params]
        a = [0.5]
        presets = ["coordinate-x1"]
        t = "0.1:10:40 geom"
        "#,
    )
    .unwrap();
    let report = run_experiment(&cfg, &opts(dir.path())).unwrap();
    assert!(report.passed());
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("series,t,value,fd_derivative"));
    let mut rows = 0;
    for line in lines {
        let value: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((value - 0.5).abs() < 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 40);
}

#[test]
fn gaussian_gap_column_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&quick_config(ExperimentKind::GaussianApprox), &opts(dir.path())).unwrap();
    assert!(report.passed());
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let gaps: Vec<(String, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[2].parse().unwrap())
        })
        .collect();
    for w in gaps.windows(2).filter(|w| w[0].0 == w[1].0) {
        assert!(w[1].1 < w[0].1);
    }
}

#[test]
fn invalid_config_lists_all_problems_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let text = format!(
        r#"
        kind = "gaussian-approx"
        output = "{}"
        colour = "red"
        [params]
        t_min = -1.0
        n = [128, 64]
        r_count = "many"
        [tolerances]
        gap_fraction = 0.0
        "#,
        out.display()
    );
    match ExperimentConfig::from_toml_str(&text) {
        Err(Error::Config(errs)) => {
            assert!(errs.len() == 5, "{errs:?}");
            for key in ["colour", "t_min", "params.n", "r_count", "gap_fraction"] {
                assert!(errs.iter().any(|e| e.contains(key)), "missing {key}: {errs:?}");
            }
        }
        other => panic!("expected config error, got {other:?}"),
    }
    assert!(!out.exists());
}

#[test]
fn tolerance_scale_and_seed_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let o = RunOptions { tol_scale: 2.0, seed: Some(99), out: Some(dir.path().to_path_buf()) };
    let report = run_experiment(&quick_config(ExperimentKind::ModeIdentity), &o).unwrap();
    assert_eq!(report.config.seed, 99);
    assert_eq!(report.config.tolerances["gram"], 2e-8);
    assert_eq!(report.tol_scale, 2.0);
}

#[test]
fn same_seed_same_bytes() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = quick_config(ExperimentKind::BridgeVariableT);
    run_experiment(&cfg, &opts(d1.path())).unwrap();
    run_experiment(&cfg, &opts(d2.path())).unwrap();
    let a = std::fs::read(d1.path().join("trace.csv")).unwrap();
    let b = std::fs::read(d2.path().join("trace.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ExperimentConfig::from_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n > 0);
}
