use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use freqlab::constants::WeightParam;
use freqlab::harness::{list_presets, run_experiment, verify_all, verify_preset, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "freqlab", version, about = "Run frequency-function experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the seed of every experiment.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Multiply every tolerance by this factor.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run { config: PathBuf },
    /// List the closed-form presets and check their residuals.
    Presets,
    /// Run every experiment kind with default parameters.
    VerifyAll {
        /// Smaller sample counts and grids.
        #[arg(long)]
        quick: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let opts = RunOptions { tol_scale: cli.tol_scale, seed: cli.seed, out: cli.out.clone() };
    match cli.command {
        Command::Run { config } => run(&config, &opts),
        Command::Presets => presets(),
        Command::VerifyAll { quick } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let opts = RunOptions { out: None, ..opts };
            match verify_all(quick, &out, &opts) {
                Ok(summary) => {
                    for e in &summary.experiments {
                        let status = if e.status == freqlab::harness::Status::Pass { "pass" } else { "FAIL" };
                        println!("{status:4}  {:18} {} checks", e.kind, e.checks);
                        for f in &e.failed {
                            println!("        failed: {f}");
                        }
                        if let Some(err) = &e.error {
                            println!("        error: {err}");
                        }
                    }
                    println!("summary written to {}", out.join(freqlab::harness::SUMMARY_FILE).display());
                    exit(summary.passed())
                }
                Err(e) => fail(e),
            }
        }
    }
}

fn run(path: &std::path::Path, opts: &RunOptions) -> ExitCode {
    let cfg = match ExperimentConfig::from_file(path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    match run_experiment(&cfg, opts) {
        Ok(report) => {
            for c in &report.checks {
                let status = if c.passed() { "pass" } else { "FAIL" };
                println!("{status:4}  {}  value={:e} {} {:e}", c.name, c.value, c.comparison, c.bound);
            }
            for a in &report.artifacts {
                println!("wrote {a}");
            }
            exit(report.passed())
        }
        Err(e) => fail(e),
    }
}

fn presets() -> ExitCode {
    let mut ok = true;
    for p in list_presets() {
        let mut worst: f64 = 0.0;
        for a in [-0.5, 0.0, 0.5] {
            let status = WeightParam::new(a).and_then(|w| verify_preset(&p, 2, w));
            match status {
                Ok(s) => {
                    worst = worst.max(s.max_residual);
                    ok &= s.ok;
                }
                Err(e) => return fail(e),
            }
        }
        println!(
            "{:18} {:12} residual {:.1e}  {}",
            p.name,
            format!("{:?}", p.role).to_lowercase(),
            worst,
            p.description
        );
    }
    exit(ok)
}

fn exit(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn fail(e: freqlab::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}
