//! Acceptance suite. Every criterion runs at its stated parameters and
//! tolerance, sequentially, and prints one pass/fail line. The test fails if
//! any criterion fails or exceeds its time limit.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use freqlab::constants::WeightParam;
use freqlab::harness::{run_experiment, verify_all, ExperimentConfig, ExperimentKind, RunOptions};
use freqlab::kernels::WeightedGaussian;
use freqlab::quad::{gauss_jacobi, gauss_legendre_on, integrate_halfspace_gaussian, GaussOrders};

struct Outcome {
    ok: bool,
    detail: String,
}

fn run_cfg(toml: &str, dir: &Path) -> Outcome {
    let cfg = match ExperimentConfig::from_toml_str(toml) {
        Ok(c) => c,
        Err(e) => return Outcome { ok: false, detail: e.to_string() },
    };
    run_cfgs(&[cfg], dir)
}

fn run_cfgs(cfgs: &[ExperimentConfig], dir: &Path) -> Outcome {
    let mut failed = Vec::new();
    let mut count = 0;
    for (i, cfg) in cfgs.iter().enumerate() {
        let opts = RunOptions { out: Some(dir.join(format!("{}-{i}", cfg.kind))), ..RunOptions::default() };
        match run_experiment(cfg, &opts) {
            Ok(r) => {
                count += r.checks.len();
                failed.extend(r.failed_checks().map(|c| format!("{} = {:e} (bound {:e})", c.name, c.value, c.bound)));
            }
            Err(e) => failed.push(e.to_string()),
        }
    }
    if failed.is_empty() {
        Outcome { ok: true, detail: format!("{count} checks") }
    } else {
        Outcome { ok: false, detail: failed.join("; ") }
    }
}

/// `∫ x₀ᵃ𝒢 dX` by the kernel's own rule and by a generic truncated tensor
/// rule on the explicit kernel.
fn normalization() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in [1, 2] {
        for a in [-0.5, 0.0, 0.5] {
            let w = WeightParam::new(a).unwrap();
            let g = WeightedGaussian::new(d, w);
            for t in [0.5, 1.0, 2.0] {
                let by_rule = integrate_halfspace_gaussian(|_| 1.0, t, d, w, GaussOrders::default()).unwrap();
                let len = 12.0 * f64::sqrt(t);
                let x0 = gauss_jacobi(60, 0.0, a).unwrap();
                let xi = gauss_legendre_on(60, -len, len).unwrap();
                let mut x = vec![0.0; d + 1];
                let mut brute = 0.0;
                let mut idx = vec![0usize; d];
                loop {
                    let mut wt = 1.0;
                    for (k, &j) in idx.iter().enumerate() {
                        x[k + 1] = xi.nodes[j];
                        wt *= xi.weights[j];
                    }
                    for (&u, &wu) in x0.nodes.iter().zip(&x0.weights) {
                        x[0] = len * u;
                        brute += wt * wu * g.eval(&x, t).unwrap();
                    }
                    let mut k = 0;
                    while k < d {
                        idx[k] += 1;
                        if idx[k] < xi.len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                    if k == d {
                        break;
                    }
                }
                brute *= len.powf(1.0 + a);
                worst = worst.max((by_rule - 1.0).abs()).max((brute - 1.0).abs());
            }
        }
    }
    Outcome { ok: worst <= 1e-8, detail: format!("max |mass - 1| = {worst:.2e}") }
}

fn csv_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = ExperimentKind::ALL
        .iter()
        .map(|k| (k.name().to_string(), fs::read(root.join(k.name()).join("trace.csv")).unwrap_or_default()))
        .collect();
    out.sort();
    out
}

fn reproducibility(dir: &Path) -> Outcome {
    let mut runs = Vec::new();
    for (i, threads) in [1, 1, 4, 4].into_iter().enumerate() {
        let out = dir.join(format!("run{i}-t{threads}"));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        match pool.install(|| verify_all(true, &out, &RunOptions::default())) {
            Ok(s) if s.passed() => runs.push(csv_bytes(&out)),
            Ok(s) => {
                let bad: Vec<_> = s
                    .experiments
                    .iter()
                    .filter(|e| !e.failed.is_empty() || e.error.is_some())
                    .map(|e| e.kind.clone())
                    .collect();
                return Outcome { ok: false, detail: format!("quick batch failed: {bad:?}") };
            }
            Err(e) => return Outcome { ok: false, detail: e.to_string() },
        }
    }
    let empty = runs[0].iter().any(|(_, b)| b.is_empty());
    let same = runs.windows(2).all(|w| w[0] == w[1]);
    Outcome {
        ok: same && !empty,
        detail: format!("{} trace files, identical across 2 runs x threads {{1, 4}}: {same}", runs[0].len()),
    }
}

#[test]
fn acceptance_criteria() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path();
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, u64, Check)> = vec![
        ("gaussian normalization", 1, Box::new(normalization)),
        (
            "gaussian approximation",
            10,
            Box::new(|| {
                run_cfg(
                    r#"
                    kind = "gaussian-approx"
                    [params]
                    d = 1
                    a = [-0.5, 0.5]
                    n = [64, 128, 256, 512]
                    t_min = 0.5
                    [tolerances]
                    gap_fraction = 0.02
                    ratio_stability = 0.05
                    "#,
                    dir,
                )
            }),
        ),
        (
            "fixed-t bridge",
            60,
            Box::new(|| {
                run_cfg(
                    r#"
                    kind = "bridge-fixed-t"
                    [params]
                    d = 1
                    a = [-0.5, 0.5]
                    n = [2, 4, 8]
                    samples = 1000000
                    phi = ["one", "x1sq", "xnorm2"]
                    [tolerances]
                    z_max = 3.0
                    constant = 1e-10
                    "#,
                    dir,
                )
            }),
        ),
        (
            "variable-t bridge",
            60,
            Box::new(|| {
                run_cfg(
                    r#"
                    kind = "bridge-variable-t"
                    [params]
                    d = 1
                    a = [-0.5, 0.5]
                    n = [2, 4, 8]
                    samples = 1000000
                    phi = ["one", "t", "x1sq"]
                    [tolerances]
                    z_max = 3.0
                    ks_critical = 1.628
                    "#,
                    dir,
                )
            }),
        ),
        (
            "elliptic almgren",
            10,
            Box::new(|| {
                run_cfg(
                    r#"
                    kind = "almgren-elliptic"
                    [params]
                    N = [2, 3]
                    a = [-0.5, 0.5]
                    degrees = [1, 2, 3]
                    r = "0.2:1:17 geom"
                    [tolerances]
                    frequency = 1e-4
                    slack = 1e-6
                    "#,
                    dir,
                )
            }),
        ),
        (
            "parabolic almgren",
            10,
            Box::new(|| {
                run_cfg(
                    r#"
                    kind = "almgren-parabolic"
                    [params]
                    d = 1
                    a = [-0.5, 0.0, 0.5]
                    presets = ["coordinate-x1", "caloric-quadratic", "x1-plus-caloric"]
                    t = "0.1:10:200 geom"
                    [tolerances]
                    exact = 1e-6
                    monotone = 1e-6
                    "#,
                    dir,
                )
            }),
        ),
        (
            "weiss and epiperimetric",
            30,
            Box::new(|| {
                let texts = [
                    r#"
                    kind = "weiss-parabolic"
                    [params]
                    a = [-0.5, 0.0, 0.5]
                    presets = ["coordinate-x1"]
                    h = [1.0]
                    [tolerances]
                    zero = 1e-8
                    "#,
                    r#"
                    kind = "weiss-elliptic"
                    [params]
                    N = [2, 3]
                    a = [-0.5, 0.5]
                    h = [0.5, 1.0, 1.5]
                    max_degree = 4
                    combos = 10
                    [tolerances]
                    identity = 1e-6
                    "#,
                    r#"
                    kind = "epiperimetric"
                    [params]
                    N = [2, 3]
                    a = [-0.5, 0.5]
                    h = [0.5, 1.0, 1.5]
                    max_degree = 4
                    combos = 100
                    [tolerances]
                    slack = 1e-8
                    saturation = 1e-8
                    "#,
                ];
                let cfgs: Result<Vec<_>, _> = texts.iter().map(|t| ExperimentConfig::from_toml_str(t)).collect();
                match cfgs {
                    Ok(c) => run_cfgs(&c, dir),
                    Err(e) => Outcome { ok: false, detail: e.to_string() },
                }
            }),
        ),
        (
            "parabolic weiss inequality",
            10,
            Box::new(|| {
                run_cfg(
                    r#"
                    kind = "weiss-parabolic"
                    [params]
                    a = [-0.5, 0.0, 0.5]
                    presets = ["coordinate-x1", "caloric-quadratic", "x1-plus-caloric"]
                    h = [1.0, 2.0, 1.0]
                    [tolerances]
                    slack = 1e-4
                    "#,
                    dir,
                )
            }),
        ),
        (
            "alt-caffarelli-friedman",
            10,
            Box::new(|| {
                run_cfg(
                    r#"
                    kind = "acf-parabolic"
                    [params]
                    a = [-0.5, 0.0, 0.5]
                    pair = "halfplane-pair"
                    [tolerances]
                    closed_form = 1e-6
                    monotone = 1e-8
                    subsolution = 1e-8
                    "#,
                    dir,
                )
            }),
        ),
        (
            "mode identity",
            10,
            Box::new(|| {
                run_cfg(
                    r#"
                    kind = "mode-identity"
                    [params]
                    N = [2, 3]
                    a = [-0.5, 0.5]
                    max_degree = 3
                    [tolerances]
                    identity = 1e-6
                    gram = 1e-8
                    "#,
                    dir,
                )
            }),
        ),
        (
            "pde solvers",
            60,
            Box::new(|| {
                run_cfg(
                    r#"
                    kind = "pde-convergence"
                    [params]
                    a = [-0.5, 0.5]
                    min_ratio = 3.0
                    [tolerances]
                    reference = 1e-12
                    poincare = 1e-300
                    "#,
                    dir,
                )
            }),
        ),
        ("reproducibility", 600, Box::new(|| reproducibility(dir))),
    ];

    let mut failures = Vec::new();
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let ok = outcome.ok && in_time;
        let mut out = std::io::stdout().lock();
        writeln!(
            out,
            "criterion {:2} {} {:28} {:7.2}s (limit {limit}s)  {}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            name,
            elapsed.as_secs_f64(),
            outcome.detail
        )
        .unwrap();
        if !ok {
            failures.push(format!("{}: {name}", i + 1));
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
