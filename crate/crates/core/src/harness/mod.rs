//! Config-driven experiment runner. Each run writes `trace.csv` and
//! `report.json` into its own output directory.

pub mod config;
mod experiments;
pub mod presets;
pub mod report;
pub mod schema;
pub mod table;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{ExperimentConfig, ExperimentKind, GridParam, ParamValue, Spacing};
pub use presets::{
    build_preset, exact_parabolic_frequency, list_presets, verify_preset, Preset, PresetRole, PresetStatus,
};
pub use report::{CheckResult, RunReport, Status};
pub use table::{Cell, Table};

use crate::error::{Error, Result};

pub const TRACE_FILE: &str = "trace.csv";
pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Multiplies every tolerance.
    pub tol_scale: f64,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { tol_scale: 1.0, seed: None, out: None }
    }
}

fn resolve(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<(ExperimentConfig, PathBuf)> {
    if !(opts.tol_scale > 0.0 && opts.tol_scale.is_finite()) {
        return Err(Error::Config(vec![format!("tol-scale must be positive, got {}", opts.tol_scale)]));
    }
    let mut cfg = cfg.clone();
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    for v in cfg.tolerances.values_mut() {
        *v *= opts.tol_scale;
    }
    let dir = opts.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| Path::new("out").join(cfg.kind.name()));
    Ok((cfg, dir))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Runs one experiment. Nothing is written if the configuration is invalid
/// or a sub-check cannot be evaluated.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport> {
    let (cfg, dir) = resolve(cfg, opts)?;
    let problems = schema::cross_checks(&cfg);
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let start = Instant::now();
    let outcome = experiments::run(&cfg)?;
    let wall = start.elapsed().as_secs_f64();

    fs::create_dir_all(&dir)?;
    let trace = dir.join(TRACE_FILE);
    outcome.table.write_csv(std::io::BufWriter::new(fs::File::create(&trace)?))?;
    let report_path = dir.join(REPORT_FILE);
    let report = RunReport {
        kind: cfg.kind.name().to_string(),
        status: RunReport::summarize(&outcome.checks),
        tol_scale: opts.tol_scale,
        config: cfg,
        checks: outcome.checks,
        wall_time_seconds: wall,
        artifacts: vec![trace.display().to_string(), report_path.display().to_string()],
    };
    write_json(&report_path, &report)?;
    Ok(report)
}

fn set(cfg: &mut ExperimentConfig, key: &str, value: impl Into<toml::Value>) {
    cfg.set(key, value.into()).expect("quick override matches the schema");
}

/// Defaults for `kind`, shrunk so the full batch finishes in seconds.
pub fn quick_config(kind: ExperimentKind) -> ExperimentConfig {
    use ExperimentKind::*;
    let mut cfg = ExperimentConfig::defaults(kind);
    match kind {
        GaussianApprox => {
            set(&mut cfg, "ratio_samples", 20_000);
            set(&mut cfg, "r_count", 1001);
        }
        BridgeFixedT | BridgeVariableT => set(&mut cfg, "samples", 100_000),
        AlmgrenParabolic => set(&mut cfg, "t", "0.1:10:50 geom"),
        WeissElliptic => set(&mut cfg, "combos", 3),
        Epiperimetric => set(&mut cfg, "combos", 24),
        _ => {}
    }
    cfg
}

#[derive(Clone, Debug, Serialize)]
pub struct SummaryEntry {
    pub kind: String,
    pub status: Status,
    pub checks: usize,
    pub failed: Vec<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BatchSummary {
    pub status: Status,
    pub quick: bool,
    pub experiments: Vec<SummaryEntry>,
}

impl BatchSummary {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Runs every experiment kind concurrently, each into `<out>/<kind>/`, and
/// writes `<out>/summary.json`.
pub fn verify_all(quick: bool, out: &Path, opts: &RunOptions) -> Result<BatchSummary> {
    let experiments: Vec<SummaryEntry> = ExperimentKind::ALL
        .par_iter()
        .map(|&kind| {
            let cfg = if quick { quick_config(kind) } else { ExperimentConfig::defaults(kind) };
            let o = RunOptions { out: Some(out.join(kind.name())), ..opts.clone() };
            match run_experiment(&cfg, &o) {
                Ok(r) => SummaryEntry {
                    kind: kind.name().to_string(),
                    status: r.status,
                    checks: r.checks.len(),
                    failed: r.failed_checks().map(|c| c.name.clone()).collect(),
                    error: None,
                },
                Err(e) => SummaryEntry {
                    kind: kind.name().to_string(),
                    status: Status::Fail,
                    checks: 0,
                    failed: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let ok = experiments.iter().all(|e| e.status == Status::Pass);
    let summary = BatchSummary { status: if ok { Status::Pass } else { Status::Fail }, quick, experiments };
    fs::create_dir_all(out)?;
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}
