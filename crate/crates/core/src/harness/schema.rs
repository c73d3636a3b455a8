//! Parameters and tolerances accepted by each experiment kind.

use super::config::{ExperimentConfig, ExperimentKind, GridParam, ParamSpec, ParamType, ParamValue, Spacing};
use super::presets::{PAIR_NAMES, SINGLE_NAMES};

const A_RANGE: ParamType = ParamType::Reals { min: -1.0, max: 1.0, open: true };
const POSITIVE: ParamType = ParamType::Real { min: 0.0, max: f64::INFINITY, open: true };

fn grid(start: f64, stop: f64, count: usize) -> ParamValue {
    ParamValue::Grid(GridParam { start, stop, count, spacing: Spacing::Geom })
}

fn spec(key: &'static str, ty: ParamType, default: ParamValue) -> ParamSpec {
    ParamSpec { key, ty, default }
}

fn ints(v: &[i64]) -> ParamValue {
    ParamValue::Ints(v.to_vec())
}

fn reals(v: &[f64]) -> ParamValue {
    ParamValue::Reals(v.to_vec())
}

fn texts(v: &[&str]) -> ParamValue {
    ParamValue::Texts(v.iter().map(|s| s.to_string()).collect())
}

fn d_spec() -> ParamSpec {
    spec("d", ParamType::Int { min: 1, max: 3 }, ParamValue::Int(1))
}

/// Ball quadrature orders: radial, polar, points per great circle. The
/// defaults integrate the degree ≤ 4 polynomial integrands exactly.
fn ball_order_specs(radial: i64) -> [ParamSpec; 3] {
    [
        spec("radial_order", ParamType::Int { min: 2, max: 200 }, ParamValue::Int(radial)),
        spec("polar_order", ParamType::Int { min: 2, max: 200 }, ParamValue::Int(8)),
        spec("circle_order", ParamType::Int { min: 4, max: 400 }, ParamValue::Int(16)),
    ]
}

fn big_n_spec() -> ParamSpec {
    spec("N", ParamType::Ints { min: 1, max: 6 }, ints(&[2, 3]))
}

pub const FIXED_PHI: &[&str] = &["one", "x1sq", "xnorm2"];
pub const VARIABLE_PHI: &[&str] = &["one", "t", "x1sq"];

pub fn param_specs(kind: ExperimentKind) -> Vec<ParamSpec> {
    use ExperimentKind::*;
    match kind {
        GaussianApprox => vec![
            d_spec(),
            spec("a", A_RANGE, reals(&[-0.5, 0.5])),
            spec("n", ParamType::Ints { min: 2, max: 1 << 20 }, ints(&[64, 128, 256, 512])),
            spec("t_min", POSITIVE, ParamValue::Real(0.5)),
            spec(
                "normalization_t",
                ParamType::Reals { min: 0.0, max: f64::INFINITY, open: true },
                reals(&[0.5, 1.0, 2.0]),
            ),
            spec("ratio_samples", ParamType::Int { min: 100, max: 1 << 32 }, ParamValue::Int(200_000)),
            spec("r_count", ParamType::Int { min: 10, max: 1 << 24 }, ParamValue::Int(4001)),
        ],
        BridgeFixedT => vec![
            d_spec(),
            spec("a", A_RANGE, reals(&[-0.5, 0.5])),
            spec("n", ParamType::Ints { min: 2, max: 64 }, ints(&[2, 4, 8])),
            spec("t", POSITIVE, ParamValue::Real(1.0)),
            spec("samples", ParamType::Int { min: 1000, max: 1 << 34 }, ParamValue::Int(1_000_000)),
            spec("phi", ParamType::Texts(FIXED_PHI), texts(FIXED_PHI)),
            spec("radial_order", ParamType::Int { min: 2, max: 200 }, ParamValue::Int(24)),
        ],
        BridgeVariableT => vec![
            d_spec(),
            spec("a", A_RANGE, reals(&[-0.5, 0.5])),
            spec("n", ParamType::Ints { min: 2, max: 64 }, ints(&[2, 4, 8])),
            spec("horizon", POSITIVE, ParamValue::Real(1.0)),
            spec("samples", ParamType::Int { min: 1000, max: 1 << 34 }, ParamValue::Int(1_000_000)),
            spec("phi", ParamType::Texts(VARIABLE_PHI), texts(VARIABLE_PHI)),
            spec("radial_order", ParamType::Int { min: 2, max: 200 }, ParamValue::Int(24)),
            spec("time_order", ParamType::Int { min: 2, max: 200 }, ParamValue::Int(16)),
        ],
        AlmgrenElliptic => vec![
            big_n_spec(),
            spec("a", A_RANGE, reals(&[-0.5, 0.5])),
            spec("degrees", ParamType::Ints { min: 1, max: 6 }, ints(&[1, 2, 3])),
            spec("r", ParamType::Grid, grid(0.2, 1.0, 17)),
        ]
        .into_iter()
        .chain(ball_order_specs(8))
        .collect(),
        AlmgrenParabolic => vec![
            d_spec(),
            spec("a", A_RANGE, reals(&[-0.5, 0.0, 0.5])),
            spec(
                "presets",
                ParamType::Texts(SINGLE_NAMES),
                texts(&["coordinate-x1", "caloric-quadratic", "x1-plus-caloric"]),
            ),
            spec("t", ParamType::Grid, grid(0.1, 10.0, 200)),
        ],
        WeissElliptic => vec![
            big_n_spec(),
            spec("a", A_RANGE, reals(&[-0.5, 0.5])),
            spec("h", ParamType::Reals { min: 0.0, max: 20.0, open: true }, reals(&[0.5, 1.0, 1.5])),
            spec("combos", ParamType::Int { min: 1, max: 100_000 }, ParamValue::Int(10)),
            spec("max_degree", ParamType::Int { min: 1, max: 6 }, ParamValue::Int(4)),
            spec("r", ParamType::Grid, grid(0.3, 1.2, 10)),
        ]
        .into_iter()
        .chain(ball_order_specs(8))
        .collect(),
        WeissParabolic => vec![
            d_spec(),
            spec("a", A_RANGE, reals(&[-0.5, 0.5])),
            spec(
                "presets",
                ParamType::Texts(SINGLE_NAMES),
                texts(&["coordinate-x1", "caloric-quadratic", "x1-plus-caloric"]),
            ),
            spec("h", ParamType::Reals { min: 0.0, max: 20.0, open: true }, reals(&[1.0, 2.0, 1.0])),
            spec("t", ParamType::Grid, grid(0.1, 10.0, 60)),
        ],
        Epiperimetric => vec![
            big_n_spec(),
            spec("a", A_RANGE, reals(&[-0.5, 0.5])),
            spec("h", ParamType::Reals { min: 0.0, max: 20.0, open: true }, reals(&[0.5, 1.0, 1.5])),
            spec("combos", ParamType::Int { min: 1, max: 1_000_000 }, ParamValue::Int(100)),
            spec("max_degree", ParamType::Int { min: 1, max: 6 }, ParamValue::Int(4)),
        ]
        .into_iter()
        .chain(ball_order_specs(8))
        .collect(),
        AcfElliptic => vec![
            big_n_spec(),
            spec("a", A_RANGE, reals(&[-0.5, 0.0, 0.5])),
            spec("r", ParamType::Grid, grid(0.25, 2.0, 8)),
            spec("radial_order", ParamType::Int { min: 2, max: 200 }, ParamValue::Int(8)),
        ],
        AcfParabolic => vec![
            d_spec(),
            spec("a", A_RANGE, reals(&[-0.5, 0.0, 0.5])),
            spec("pair", ParamType::Text(PAIR_NAMES), ParamValue::Text("halfplane-pair".into())),
            spec("t", ParamType::Grid, grid(0.1, 10.0, 60)),
            spec("time_order", ParamType::Int { min: 2, max: 200 }, ParamValue::Int(8)),
            spec("horizon", POSITIVE, ParamValue::Real(1.0)),
            spec("bump_order", ParamType::Int { min: 2, max: 64 }, ParamValue::Int(12)),
        ],
        ModeIdentity => vec![
            big_n_spec(),
            spec("a", A_RANGE, reals(&[-0.5, 0.5])),
            spec("max_degree", ParamType::Int { min: 0, max: 6 }, ParamValue::Int(3)),
        ],
        PdeConvergence => vec![
            spec("a", A_RANGE, reals(&[-0.5, 0.5])),
            spec("elliptic_m", ParamType::Ints { min: 3, max: 1025 }, ints(&[9, 17, 33])),
            spec("parabolic_m", ParamType::Ints { min: 3, max: 1025 }, ints(&[9, 17, 33])),
            spec("parabolic_steps", ParamType::Ints { min: 1, max: 100_000 }, ints(&[4, 8, 16])),
            spec("min_ratio", POSITIVE, ParamValue::Real(3.0)),
            spec("poincare_N", ParamType::Ints { min: 1, max: 4 }, ints(&[1, 2])),
        ],
    }
}

pub fn tolerance_specs(kind: ExperimentKind) -> &'static [(&'static str, f64)] {
    use ExperimentKind::*;
    match kind {
        GaussianApprox => &[("normalization", 1e-8), ("gap_fraction", 0.02), ("ratio_stability", 0.05)],
        BridgeFixedT => &[("z_max", 3.0), ("constant", 1e-10)],
        BridgeVariableT => &[("z_max", 3.0), ("ks_critical", 1.63)],
        AlmgrenElliptic => &[("frequency", 1e-4), ("slack", 1e-6)],
        AlmgrenParabolic => &[("exact", 1e-6), ("monotone", 1e-6)],
        WeissElliptic => &[("identity", 1e-6), ("derivative", 1e-4), ("matching", 1e-8)],
        WeissParabolic => &[("slack", 1e-4), ("zero", 1e-8)],
        Epiperimetric => &[("slack", 1e-8), ("saturation", 1e-8)],
        AcfElliptic => &[("closed_form", 1e-10)],
        AcfParabolic => &[("closed_form", 1e-6), ("monotone", 1e-8), ("subsolution", 1e-8)],
        ModeIdentity => &[("identity", 1e-6), ("gram", 1e-8)],
        PdeConvergence => &[("reference", 1e-12), ("poincare", 1e-12)],
    }
}

/// Constraints spanning several parameters.
pub fn cross_checks(cfg: &ExperimentConfig) -> Vec<String> {
    let mut errs = Vec::new();
    let len = |k: &str| match cfg.params.get(k) {
        Some(ParamValue::Ints(v)) => v.len(),
        Some(ParamValue::Reals(v)) => v.len(),
        Some(ParamValue::Texts(v)) => v.len(),
        _ => 1,
    };
    match cfg.kind {
        ExperimentKind::GaussianApprox => {
            if let Ok(n) = cfg.ints("n") {
                if n.len() < 2 || n.windows(2).any(|w| w[1] <= w[0]) {
                    errs.push("params.n: needs at least two strictly increasing values".into());
                }
            }
        }
        ExperimentKind::WeissParabolic => {
            if len("presets") != len("h") {
                errs.push("params.h: needs one homogeneity per preset".into());
            }
        }
        ExperimentKind::PdeConvergence => {
            if len("parabolic_m") != len("parabolic_steps") {
                errs.push("params.parabolic_steps: needs one step count per parabolic grid".into());
            }
            for k in ["elliptic_m", "parabolic_m"] {
                if len(k) < 2 {
                    errs.push(format!("params.{k}: needs at least two grids"));
                }
            }
        }
        _ => {}
    }
    errs
}
