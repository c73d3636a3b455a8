//! One runner per experiment kind. Each returns its checks and the table
//! written to `trace.csv`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, ExperimentKind};
use super::presets::{build_preset, exact_parabolic_frequency};
use super::report::CheckResult;
use super::table::{Cell, Table};
use crate::constants::{epi_kappa0, weighted_half_sphere_measure, DimensionSpec, WeightParam};
use crate::error::{Error, Result};
use crate::functionals::*;
use crate::kernels::{ratio_bound_estimate, ratio_bound_exact, sup_gap_gn, GapGrid, WeightedGaussian};
use crate::measures::{ks_uniform, sample_mu_global, verify_fixed_t_bridge, verify_variable_t_bridge, BridgeOptions};
use crate::pde::convergence::{
    elliptic_manufactured_error, error_ratios, parabolic_manufactured_error, unweighted_reference_gap,
};
use crate::pde::{bump_suite, check_mode_identity, orthonormalize_modes, poincare_check, ModeBasis};
use crate::quad::{integrate_halfspace_gaussian, AngularOrders, GaussOrders, HalfBallRule, HalfspaceGaussRule};

pub(crate) struct Outcome {
    pub checks: Vec<CheckResult>,
    pub table: Table,
}

/// Tags a runtime failure with the sub-check it came from.
fn at<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Check { .. } => e,
        other => Error::Check { name: name.to_string(), detail: other.to_string() },
    })
}

fn weight(a: f64) -> Result<WeightParam> {
    WeightParam::new(a)
}

fn label(a: f64) -> String {
    format!("a{a}")
}

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    use ExperimentKind::*;
    match cfg.kind {
        GaussianApprox => gaussian_approx(cfg),
        BridgeFixedT => bridge_fixed(cfg),
        BridgeVariableT => bridge_variable(cfg),
        AlmgrenElliptic => almgren_elliptic(cfg),
        AlmgrenParabolic => almgren_parabolic(cfg),
        WeissElliptic => weiss_elliptic(cfg),
        WeissParabolic => weiss_parabolic(cfg),
        Epiperimetric => epiperimetric(cfg),
        AcfElliptic => acf_elliptic(cfg),
        AcfParabolic => acf_parabolic(cfg),
        ModeIdentity => mode_identity(cfg),
        PdeConvergence => pde_convergence(cfg),
    }
}

fn gaussian_approx(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.usize("d")?;
    let ns = cfg.usizes("n")?;
    let t_min = cfg.real("t_min")?;
    let samples = cfg.usize("ratio_samples")?;
    let grid = GapGrid { r_count: cfg.usize("r_count")?, ..GapGrid::default() };
    let mut checks = Vec::new();
    let mut table = Table::new(&["a", "n", "sup_gap", "ratio_estimate", "ratio_estimate_doubled", "ratio_exact"]);
    for a in cfg.reals("a")? {
        let w = weight(a)?;
        let name = format!("normalization {}", label(a));
        let mut worst: f64 = 0.0;
        for t in cfg.reals("normalization_t")? {
            let m = at(&name, integrate_halfspace_gaussian(|_| 1.0, t, d, w, GaussOrders::default()))?;
            worst = worst.max((m - 1.0).abs());
        }
        checks.push(CheckResult::le(name, worst, cfg.tolerance("normalization")?));

        let name = format!("gap {}", label(a));
        let (mut gaps, mut stab, mut over) = (Vec::new(), 0f64, 0f64);
        for &n in &ns {
            let dims = at(&name, DimensionSpec::new(d, n))?;
            let gap = at(&name, sup_gap_gn(dims, w, t_min, grid))?;
            let e1 = at(&name, ratio_bound_estimate(dims, w, samples, cfg.seed))?;
            let e2 = at(&name, ratio_bound_estimate(dims, w, 2 * samples, cfg.seed))?;
            let exact = at(&name, ratio_bound_exact(dims, w))?;
            stab = stab.max((e2 / e1 - 1.0).abs());
            over = over.max(e1.max(e2) / exact);
            gaps.push(gap);
            table.push(vec![a.into(), n.into(), gap.into(), e1.into(), e2.into(), exact.into()]);
        }
        let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
        checks.push(CheckResult::holds(format!("gap decreasing {}", label(a)), decreasing, format!("{gaps:?}")));
        let g0 = WeightedGaussian::new(d, w).eval(&vec![0.0; d + 1], t_min)?;
        checks.push(CheckResult::le(
            format!("final gap fraction {}", label(a)),
            gaps[gaps.len() - 1] / g0,
            cfg.tolerance("gap_fraction")?,
        ));
        checks.push(CheckResult::le(format!("ratio stability {}", label(a)), stab, cfg.tolerance("ratio_stability")?));
        checks.push(CheckResult::le(format!("ratio below bound {}", label(a)), over, 1.0 + 1e-12));
    }
    Ok(Outcome { checks, table })
}

fn phi_fixed(name: &str) -> fn(&[f64]) -> f64 {
    match name {
        "one" => |_| 1.0,
        "x1sq" => |x| x[1] * x[1],
        _ => |x| x.iter().map(|v| v * v).sum(),
    }
}

fn phi_variable(name: &str) -> fn(&[f64], f64) -> f64 {
    match name {
        "one" => |_, _| 1.0,
        "t" => |_, t| t,
        _ => |x, _| x[1] * x[1],
    }
}

fn bridge_table() -> Table {
    Table::new(&["a", "n", "phi", "mc", "quadrature", "stderr", "z"])
}

fn bridge_fixed(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.usize("d")?;
    let t = cfg.real("t")?;
    let opts = BridgeOptions {
        count: cfg.usize("samples")?,
        seed: cfg.seed,
        radial_order: cfg.usize("radial_order")?,
        ..BridgeOptions::default()
    };
    let (z_max, c_tol) = (cfg.tolerance("z_max")?, cfg.tolerance("constant")?);
    let mut checks = Vec::new();
    let mut table = bridge_table();
    for a in cfg.reals("a")? {
        let w = weight(a)?;
        for n in cfg.usizes("n")? {
            for phi in cfg.texts("phi")? {
                let name = format!("bridge {} n{n} {phi}", label(a));
                let dims = at(&name, DimensionSpec::new(d, n))?;
                let r = at(&name, verify_fixed_t_bridge(phi_fixed(&phi), dims, w, t, opts))?;
                let z = r.z_score();
                table.push(vec![
                    a.into(),
                    n.into(),
                    phi.as_str().into(),
                    r.mc_lhs.into(),
                    r.quad_rhs.into(),
                    r.stderr.into(),
                    z.into(),
                ]);
                checks.push(if phi == "one" {
                    CheckResult::le(name, (r.mc_lhs - r.quad_rhs).abs() / r.quad_rhs.abs().max(1.0), c_tol)
                } else {
                    CheckResult::le(name, z, z_max)
                });
            }
        }
    }
    Ok(Outcome { checks, table })
}

fn bridge_variable(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.usize("d")?;
    let big_t = cfg.real("horizon")?;
    let opts = BridgeOptions {
        count: cfg.usize("samples")?,
        seed: cfg.seed,
        radial_order: cfg.usize("radial_order")?,
        time_order: cfg.usize("time_order")?,
        ..BridgeOptions::default()
    };
    let z_max = cfg.tolerance("z_max")?;
    let mut checks = Vec::new();
    let mut table = bridge_table();
    for a in cfg.reals("a")? {
        let w = weight(a)?;
        for n in cfg.usizes("n")? {
            let dims = DimensionSpec::new(d, n)?;
            for phi in cfg.texts("phi")? {
                let name = format!("bridge {} n{n} {phi}", label(a));
                let r = at(&name, verify_variable_t_bridge(phi_variable(&phi), dims, w, big_t, opts))?;
                let z = r.z_score();
                table.push(vec![
                    a.into(),
                    n.into(),
                    phi.as_str().into(),
                    r.mc_lhs.into(),
                    r.quad_rhs.into(),
                    r.stderr.into(),
                    z.into(),
                ]);
                checks.push(CheckResult::le(name, z, z_max));
            }
            let name = format!("time marginal KS {} n{n}", label(a));
            let batch = at(&name, sample_mu_global(dims, w, big_t, opts.count, opts.seed))?;
            let times = batch.times.as_deref().unwrap_or_default();
            let stat = ks_uniform(times, big_t) * (times.len() as f64).sqrt();
            checks.push(CheckResult::le(name, stat, cfg.tolerance("ks_critical")?));
        }
    }
    Ok(Outcome { checks, table })
}

fn ball_orders(cfg: &ExperimentConfig) -> Result<EllipticOrders> {
    Ok(EllipticOrders {
        radial: cfg.usize("radial_order")?,
        angular: AngularOrders { polar: cfg.usize("polar_order")?, circle: cfg.usize("circle_order")? },
    })
}

fn first_of_degree(basis: &ModeBasis, h: u32) -> Result<usize> {
    basis.of_degree(h).next().map(|(i, _)| i).ok_or_else(|| Error::Basis(format!("no mode of degree {h}")))
}

fn almgren_elliptic(cfg: &ExperimentConfig) -> Result<Outcome> {
    let degrees: Vec<u32> = cfg.usizes("degrees")?.into_iter().map(|h| h as u32).collect();
    let radii = cfg.grid("r")?;
    let orders = ball_orders(cfg)?;
    let mut checks = Vec::new();
    let mut table = Table::for_traces("r");
    for big_n in cfg.usizes("N")? {
        for a in cfg.reals("a")? {
            let w = weight(a)?;
            let tag = format!("N{big_n} {}", label(a));
            let max_deg = degrees.iter().copied().max().unwrap_or(1);
            let basis = at(&tag, orthonormalize_modes(max_deg, big_n, w, AngularOrders::default()))?;
            let rules = EllipticRules::new(big_n, w, orders)?;
            for &h in &degrees {
                let name = format!("frequency {tag} h{h}");
                let j = at(&name, first_of_degree(&basis, h))?;
                let tr = at(&name, elliptic_almgren_trace(&basis.modes[j].poly, &radii, &rules))?;
                let err = tr.values.iter().map(|l| (l - h as f64).abs()).fold(0.0, f64::max);
                checks.push(CheckResult::le(name, err, cfg.tolerance("frequency")?));
                table.push_trace(&format!("N{big_n}_{}_h{h}", label(a)), &tr);
            }
            for pair in degrees.windows(2) {
                let name = format!("bound slack {tag} mix{}-{}", pair[0], pair[1]);
                let v = basis
                    .combine(&[(first_of_degree(&basis, pair[0])?, 1.0), (first_of_degree(&basis, pair[1])?, 0.8)]);
                let rep = at(&name, almgren_elliptic_bound_check(&v, |_| 0.0, &radii, &rules))?;
                checks.push(CheckResult::ge(name, rep.min_slack, -cfg.tolerance("slack")?));
                let tr = at("mixture trace", elliptic_almgren_trace(&v, &radii, &rules))?;
                table.push_trace(&format!("N{big_n}_{}_mix{}-{}", label(a), pair[0], pair[1]), &tr);
            }
        }
    }
    Ok(Outcome { checks, table })
}

fn almgren_parabolic(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.usize("d")?;
    let times = cfg.grid("t")?;
    let mut checks = Vec::new();
    let mut table = Table::for_traces("t");
    for a in cfg.reals("a")? {
        let w = weight(a)?;
        let rule = HalfspaceGaussRule::new(d, w, GaussOrders::default())?;
        for preset in cfg.texts("presets")? {
            let tag = format!("{preset} {}", label(a));
            let u = at(&tag, build_preset(&preset, d, w))?;
            let tr = at(&tag, parabolic_almgren_trace(&u[0], &times, &rule))?;
            checks.push(CheckResult::holds(
                format!("defined {tag}"),
                tr.flagged.is_empty(),
                format!("flagged {:?}", tr.flagged),
            ));
            if exact_parabolic_frequency(&preset, 1.0, d, w).is_some() {
                let err = times
                    .iter()
                    .zip(&tr.trace.values)
                    .map(|(&t, v)| (v - exact_parabolic_frequency(&preset, t, d, w).unwrap_or(f64::NAN)).abs())
                    .fold(0.0, f64::max);
                checks.push(CheckResult::le(format!("exact {tag}"), err, cfg.tolerance("exact")?));
            }
            let bad = monotonicity_scan(&tr.trace, cfg.tolerance("monotone")?);
            checks.push(CheckResult::holds(
                format!("monotone {tag}"),
                bad.is_empty(),
                format!("violations at {bad:?}"),
            ));
            table.push_trace(&format!("{preset}_{}", label(a)), &tr.trace);
        }
    }
    Ok(Outcome { checks, table })
}

/// Four random `(mode index, coefficient)` terms.
fn random_terms(basis: &ModeBasis, rng: &mut ChaCha8Rng) -> Vec<(usize, f64)> {
    (0..4).map(|_| (rng.random_range(0..basis.len()), rng.random_range(-1.0..1.0))).collect()
}

fn merged_degrees(basis: &ModeBasis, terms: &[(usize, f64)]) -> Vec<(u32, f64)> {
    let mut c = vec![0.0; basis.len()];
    for &(j, x) in terms {
        c[j] += x;
    }
    c.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(j, &x)| (basis.modes[j].degree, x)).collect()
}

fn weiss_elliptic(cfg: &ExperimentConfig) -> Result<Outcome> {
    let radii = cfg.grid("r")?;
    let combos = cfg.usize("combos")?;
    let max_deg = cfg.usize("max_degree")? as u32;
    let mut checks = Vec::new();
    let mut table = Table::for_traces("r");
    let mut stream = 0u64;
    for big_n in cfg.usizes("N")? {
        for a in cfg.reals("a")? {
            let w = weight(a)?;
            let tag = format!("N{big_n} {}", label(a));
            let basis = at(&tag, orthonormalize_modes(max_deg, big_n, w, AngularOrders::default()))?;
            let rules = EllipticRules::new(big_n, w, ball_orders(cfg)?)?;
            for h in cfg.reals("h")? {
                let p = WeissParams::new(h, big_n, w)?;
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(stream);
                stream += 1;
                let name = format!("full-ball identities {tag} h{h}");
                let mut worst: f64 = 0.0;
                let mut first = None;
                for _ in 0..combos {
                    let terms = random_terms(&basis, &mut rng);
                    let v = basis.combine(&terms);
                    let (we, web) = mode_weiss_closed_form(&merged_degrees(&basis, &terms), &p, big_n, w);
                    let got = at(&name, elliptic_weiss_full(&v, 1.0, &p, &rules))?;
                    let gotb = at(&name, elliptic_weiss_of_extension(&v, 1.0, &p, &rules, true))?;
                    worst = worst.max((got - we).abs()).max((gotb - web).abs());
                    first.get_or_insert(v);
                }
                checks.push(CheckResult::le(name, worst, cfg.tolerance("identity")?));
                if let Some(v) = first {
                    let name = format!("derivative identity {tag} h{h}");
                    let rep = at(&name, weiss_derivative_identity_check(&v, &radii, &p, &rules))?;
                    checks.push(CheckResult::le(name, rep.max_residual, cfg.tolerance("derivative")?));
                    let values =
                        radii.iter().map(|&r| elliptic_weiss(&v, r, &p, &rules)).collect::<Result<Vec<_>>>()?;
                    table.push_trace(
                        &format!("N{big_n}_{}_h{h}", label(a)),
                        &FrequencyTrace::new(TraceParam::R, radii.clone(), values)?,
                    );
                }
                if h.fract() == 0.0 && h as u32 <= max_deg {
                    let name = format!("matching mode {tag} h{h}");
                    let j = at(&name, first_of_degree(&basis, h as u32))?;
                    let mut worst: f64 = 0.0;
                    for &r in &radii {
                        worst = worst.max(at(&name, elliptic_weiss(&basis.modes[j].poly, r, &p, &rules))?.abs());
                    }
                    checks.push(CheckResult::le(name, worst, cfg.tolerance("matching")?));
                }
            }
        }
    }
    Ok(Outcome { checks, table })
}

fn weiss_parabolic(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.usize("d")?;
    let times = cfg.grid("t")?;
    let presets = cfg.texts("presets")?;
    let hs = cfg.reals("h")?;
    let mut checks = Vec::new();
    let mut table = Table::for_traces("t");
    for a in cfg.reals("a")? {
        let w = weight(a)?;
        let rule = HalfspaceGaussRule::new(d, w, GaussOrders::default())?;
        for (preset, &h) in presets.iter().zip(&hs) {
            let tag = format!("{preset} h{h} {}", label(a));
            let u = at(&tag, build_preset(preset, d, w))?;
            let rep = at(&tag, parabolic_weiss_trace(&u[0], &times, h, &rule))?;
            checks.push(CheckResult::ge(
                format!("inequality slack {tag}"),
                rep.inequality.min_slack,
                -cfg.tolerance("slack")?,
            ));
            if preset == "coordinate-x1" && h == 1.0 {
                let m = rep.trace.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
                checks.push(CheckResult::le(format!("vanishing {tag}"), m, cfg.tolerance("zero")?));
            }
            table.push_trace(&format!("{preset}_h{h}_{}", label(a)), &rep.trace);
        }
    }
    Ok(Outcome { checks, table })
}

fn epiperimetric(cfg: &ExperimentConfig) -> Result<Outcome> {
    let combos = cfg.usize("combos")?;
    let max_deg = cfg.usize("max_degree")? as u32;
    let hs = cfg.reals("h")?;
    let mut cases = Vec::new();
    for big_n in cfg.usizes("N")? {
        for a in cfg.reals("a")? {
            let w = weight(a)?;
            let tag = format!("N{big_n} {}", label(a));
            let basis = at(&tag, orthonormalize_modes(max_deg, big_n, w, AngularOrders::default()))?;
            let rules = EllipticRules::new(big_n, w, ball_orders(cfg)?)?;
            cases.push((big_n, a, basis, rules));
        }
    }
    let mut table = Table::new(&["case", "N", "a", "h", "kappa", "slack"]);
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = f64::INFINITY;
    let total = cases.len() * hs.len();
    for i in 0..combos {
        let (big_n, a, basis, rules) = &cases[(i % total) / hs.len()];
        let h = hs[i % hs.len()];
        let name = format!("random combination {i}");
        let k0 = at(&name, epi_kappa0(h, *big_n, rules.a))?;
        let v = basis.combine(&random_terms(basis, &mut rng));
        let s = at(&name, epiperimetric_check(&v, h, k0, rules))?;
        worst = worst.min(s);
        table.push(vec![format!("random-{i}").into(), (*big_n).into(), (*a).into(), h.into(), k0.into(), s.into()]);
    }
    checks.push(CheckResult::ge("random combinations min slack", worst, -cfg.tolerance("slack")?));
    let mut sat: f64 = 0.0;
    for (big_n, a, basis, rules) in &cases {
        for &h in &hs {
            let j = h.floor() as u32 + 1;
            if j > max_deg {
                continue;
            }
            let name = format!("saturation N{big_n} {} h{h}", label(*a));
            let k0 = at(&name, epi_kappa0(h, *big_n, rules.a))?;
            let idx = at(&name, first_of_degree(basis, j))?;
            let s = at(&name, epiperimetric_check(&basis.combine(&[(idx, 1.0)]), h, k0, rules))?;
            sat = sat.max(s.abs());
            table.push(vec![
                format!("saturation-j{j}").into(),
                (*big_n).into(),
                (*a).into(),
                h.into(),
                k0.into(),
                s.into(),
            ]);
        }
    }
    checks.push(CheckResult::le("single-mode saturation", sat, cfg.tolerance("saturation")?));
    Ok(Outcome { checks, table })
}

fn acf_elliptic(cfg: &ExperimentConfig) -> Result<Outcome> {
    let radii = cfg.grid("r")?;
    let order = cfg.usize("radial_order")?;
    let mut checks = Vec::new();
    let mut table = Table::for_traces("r");
    for big_n in cfg.usizes("N")? {
        for a in cfg.reals("a")? {
            let w = weight(a)?;
            let name = format!("halfplane pair N{big_n} {}", label(a));
            let rule = at(&name, HalfBallRule::gamma_weighted(big_n, w, order, AngularOrders::default()))?;
            let mass = weighted_half_sphere_measure(big_n as f64, 1.0, w)?;
            let (p, m) = (PositivePart { dim: big_n + 1, sign: 1.0 }, PositivePart { dim: big_n + 1, sign: -1.0 });
            let mut values = Vec::new();
            let mut worst: f64 = 0.0;
            for &r in &radii {
                let phi = at(&name, elliptic_acf(&p, &m, r, &rule))?;
                let exact = r.powf(a - 1.0) * (mass * r * r / 4.0).powi(2);
                worst = worst.max((phi - exact).abs() / exact);
                values.push(phi);
            }
            checks.push(CheckResult::le(name, worst, cfg.tolerance("closed_form")?));
            table.push_trace(
                &format!("N{big_n}_{}", label(a)),
                &FrequencyTrace::new(TraceParam::R, radii.clone(), values)?,
            );
        }
    }
    Ok(Outcome { checks, table })
}

fn acf_parabolic(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.usize("d")?;
    let times = cfg.grid("t")?;
    let pair = cfg.text("pair")?;
    let horizon = cfg.real("horizon")?;
    let bump_order = cfg.usize("bump_order")?;
    let bumps = default_bump_family(d, horizon);
    let mut checks = Vec::new();
    let mut table = Table::for_traces("t");
    for a in cfg.reals("a")? {
        let w = weight(a)?;
        let tag = format!("{pair} {}", label(a));
        let rule = HalfspaceGaussRule::new(d, w, GaussOrders::default())?;
        let u = at(&tag, build_preset(pair, d, w))?;
        let tr = at(&tag, parabolic_acf_trace(&u[0], &u[1], &times, &rule, cfg.usize("time_order")?))?;
        let err = times
            .iter()
            .zip(&tr.values)
            .map(|(t, v)| {
                let exact = t.powf((3.0 + a) / 2.0) / 4.0;
                (v - exact).abs() / exact.max(1.0)
            })
            .fold(0.0, f64::max);
        checks.push(CheckResult::le(format!("closed form {tag}"), err, cfg.tolerance("closed_form")?));
        let bad = monotonicity_scan(&tr, cfg.tolerance("monotone")?);
        checks.push(CheckResult::holds(format!("monotone {tag}"), bad.is_empty(), format!("violations at {bad:?}")));
        for (i, f) in u.iter().enumerate() {
            let name = format!("subsolution {tag} part{i}");
            let rep = at(&name, subsolution_check(f, &bumps, w, horizon, bump_order))?;
            checks.push(CheckResult::le(name, rep.max, cfg.tolerance("subsolution")?));
        }
        let name = format!("negative control {}", label(a));
        let neg = at(&name, negative_control(d, w))?;
        let rep = at(&name, subsolution_check(&neg, &bumps, w, horizon, bump_order))?;
        checks.push(CheckResult::gt(name, rep.max, 0.0).with_detail("1 - x1^2 must fail on some bump"));
        table.push_trace(&format!("{pair}_{}", label(a)), &tr);
    }
    Ok(Outcome { checks, table })
}

fn mode_identity(cfg: &ExperimentConfig) -> Result<Outcome> {
    let max_deg = cfg.usize("max_degree")? as u32;
    let mut checks = Vec::new();
    let mut table = Table::new(&["N", "a", "j", "k", "degree_j", "degree_k", "residual", "gram_error"]);
    for big_n in cfg.usizes("N")? {
        for a in cfg.reals("a")? {
            let w = weight(a)?;
            let tag = format!("N{big_n} {}", label(a));
            let basis = at(&tag, orthonormalize_modes(max_deg, big_n, w, AngularOrders::default()))?;
            let gram = at(&tag, basis.gram())?;
            let (mut worst, mut gworst): (f64, f64) = (0.0, 0.0);
            for j in 0..basis.len() {
                for k in j..basis.len() {
                    let r = at(&tag, check_mode_identity(&basis, j, k))?;
                    let g = (gram[(j, k)] - if j == k { 1.0 } else { 0.0 }).abs();
                    worst = worst.max(r);
                    gworst = gworst.max(g);
                    let row: Vec<Cell> = vec![
                        big_n.into(),
                        a.into(),
                        j.into(),
                        k.into(),
                        (basis.modes[j].degree as usize).into(),
                        (basis.modes[k].degree as usize).into(),
                        r.into(),
                        g.into(),
                    ];
                    table.push(row);
                }
            }
            checks.push(CheckResult::le(format!("mode identity {tag}"), worst, cfg.tolerance("identity")?));
            checks.push(CheckResult::le(format!("gram {tag}"), gworst, cfg.tolerance("gram")?));
        }
    }
    Ok(Outcome { checks, table })
}

fn pde_convergence(cfg: &ExperimentConfig) -> Result<Outcome> {
    let min_ratio = cfg.real("min_ratio")?;
    let em = cfg.usizes("elliptic_m")?;
    let pm = cfg.usizes("parabolic_m")?;
    let ps = cfg.usizes("parabolic_steps")?;
    let mut checks = Vec::new();
    let mut table = Table::new(&["solver", "a", "m", "steps", "max_error"]);
    for a in cfg.reals("a")? {
        let w = weight(a)?;
        let name = format!("elliptic convergence {}", label(a));
        let mut errs = Vec::new();
        for &m in &em {
            let e = at(&name, elliptic_manufactured_error(w, m))?;
            table.push(vec!["elliptic".into(), a.into(), m.into(), Cell::Empty, e.into()]);
            errs.push(e);
        }
        let worst = error_ratios(&errs).into_iter().fold(f64::INFINITY, f64::min);
        checks.push(CheckResult::ge(name, worst, min_ratio));
        let name = format!("parabolic convergence {}", label(a));
        let mut errs = Vec::new();
        for (&m, &s) in pm.iter().zip(&ps) {
            let e = at(&name, parabolic_manufactured_error(w, m, s))?;
            table.push(vec!["parabolic".into(), a.into(), m.into(), s.into(), e.into()]);
            errs.push(e);
        }
        let worst = error_ratios(&errs).into_iter().fold(f64::INFINITY, f64::min);
        checks.push(CheckResult::ge(name, worst, min_ratio));
    }
    let gap = at("unweighted reference", unweighted_reference_gap(9, 11))?;
    checks.push(CheckResult::le("unweighted reference", gap, cfg.tolerance("reference")?));
    for big_n in cfg.usizes("poincare_N")? {
        for a in cfg.reals("a")? {
            let w = weight(a)?;
            let name = format!("poincare N{big_n} {}", label(a));
            let mut worst = f64::INFINITY;
            for b in bump_suite(big_n, 1.0) {
                worst = worst.min(at(&name, poincare_check(&b, 1.0, big_n, w, 32, AngularOrders::default()))?);
            }
            checks.push(CheckResult::ge(name, worst, -cfg.tolerance("poincare")?));
        }
    }
    Ok(Outcome { checks, table })
}
