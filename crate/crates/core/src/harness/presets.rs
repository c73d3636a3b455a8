//! Named closed-form solutions, subsolutions and pairs.

use serde::Serialize;

use crate::constants::WeightParam;
use crate::error::{domain, Result};
use crate::field::SpaceTimeField;
use crate::pde::{BoundaryType, ClosedForm, ClosedFormSolution, Sign};
use crate::poly::Poly;

pub const SINGLE_NAMES: &[&str] = &[
    "constant-one",
    "coordinate-x1",
    "caloric-quadratic",
    "x1-plus-caloric",
    "caloric-quartic",
    "thin-vanishing",
    "halfplane-plus",
    "halfplane-minus",
];

pub const PAIR_NAMES: &[&str] = &["halfplane-pair"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetRole {
    Solution,
    Subsolution,
    Pair,
}

#[derive(Clone, Debug, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub role: PresetRole,
    pub description: &'static str,
}

pub fn list_presets() -> Vec<Preset> {
    let p = |name, role, description| Preset { name, role, description };
    vec![
        p("constant-one", PresetRole::Solution, "U = 1"),
        p("coordinate-x1", PresetRole::Solution, "U = x1"),
        p("caloric-quadratic", PresetRole::Solution, "U = |X|^2 - 2(d+1+a)t"),
        p("x1-plus-caloric", PresetRole::Solution, "U = x1 + |X|^2 - 2(d+1+a)t"),
        p("caloric-quartic", PresetRole::Solution, "caloric polynomial generated by x1^4"),
        p("thin-vanishing", PresetRole::Solution, "U = x0^(1-a), type II"),
        p("halfplane-plus", PresetRole::Subsolution, "U = max(x1, 0)"),
        p("halfplane-minus", PresetRole::Subsolution, "U = max(-x1, 0)"),
        p("halfplane-pair", PresetRole::Pair, "(max(x1, 0), max(-x1, 0))"),
    ]
}

fn solutions_for(name: &str, d: usize) -> Result<Vec<ClosedFormSolution>> {
    use ClosedFormSolution as C;
    let x1_4 = {
        let mut e = vec![0; d + 1];
        e[1] = 4;
        Poly::monomial(e, 1.0)
    };
    Ok(match name {
        "constant-one" => vec![C::Constant(1.0)],
        "coordinate-x1" => vec![C::Coordinate(1)],
        "caloric-quadratic" => vec![C::CaloricQuadratic],
        "x1-plus-caloric" => vec![C::LinearCombination(vec![(1.0, C::Coordinate(1)), (1.0, C::CaloricQuadratic)])],
        "caloric-quartic" => vec![C::CaloricPoly(x1_4)],
        "thin-vanishing" => vec![C::ThinVanishing(None)],
        "halfplane-plus" => vec![C::HalfPlanePart(Sign::Plus)],
        "halfplane-minus" => vec![C::HalfPlanePart(Sign::Minus)],
        "halfplane-pair" => vec![C::HalfPlanePart(Sign::Plus), C::HalfPlanePart(Sign::Minus)],
        other => return domain(format!("unknown preset `{other}`")),
    })
}

/// The fields of a preset (one, or two for a pair).
pub fn build_preset(name: &str, d: usize, a: WeightParam) -> Result<Vec<ClosedForm>> {
    solutions_for(name, d)?.into_iter().map(|s| ClosedForm::new(s, d, a)).collect()
}

/// `ℒ(t)` where it is known in closed form.
pub fn exact_parabolic_frequency(name: &str, t: f64, d: usize, a: WeightParam) -> Option<f64> {
    let c = d as f64 + 1.0 + a.get();
    match name {
        "coordinate-x1" | "halfplane-plus" | "halfplane-minus" => Some(0.5),
        "caloric-quadratic" => Some(1.0),
        "x1-plus-caloric" => Some((1.0 + 8.0 * t * c) / (2.0 + 8.0 * t * c)),
        "constant-one" => Some(0.0),
        _ => None,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PresetStatus {
    pub name: &'static str,
    pub role: PresetRole,
    pub boundary: Option<BoundaryType>,
    pub max_residual: f64,
    pub ok: bool,
}

/// Largest backward-equation residual on a fixed set of interior points,
/// away from the kink of the half-plane parts.
pub fn verify_preset(p: &Preset, d: usize, a: WeightParam) -> Result<PresetStatus> {
    let fields = build_preset(p.name, d, a)?;
    let mut worst: f64 = 0.0;
    let mut x = vec![0.0; d + 1];
    for i in 0..64 {
        let s = i as f64;
        x[0] = 0.05 + 0.9 * ((s * 0.618034) % 1.0);
        for (k, xk) in x.iter_mut().enumerate().skip(1) {
            let v = ((s + 1.0) * (0.414214 + 0.1 * k as f64)) % 1.0;
            *xk = if v < 0.5 { -0.1 - v } else { v };
        }
        let t = 0.2 + 1.5 * ((s * 0.7548777) % 1.0);
        for f in &fields {
            worst = worst.max(f.backward_residual(&x, t).abs());
        }
    }
    let boundary = fields.first().and_then(|f| f.boundary_type());
    Ok(PresetStatus { name: p.name, role: p.role, boundary, max_residual: worst, ok: worst <= 1e-10 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_contract() {
        let names: Vec<&str> = list_presets().iter().map(|p| p.name).collect();
        for n in ["coordinate-x1", "caloric-quadratic", "halfplane-pair"] {
            assert!(names.contains(&n));
        }
        assert_eq!(names, list_presets().iter().map(|p| p.name).collect::<Vec<_>>());
        let mut all: Vec<&str> = SINGLE_NAMES.to_vec();
        all.extend(PAIR_NAMES);
        assert_eq!(names, all);
    }

    #[test]
    fn presets_pass_residual_on_load() {
        for a in [-0.5, 0.0, 0.5] {
            for d in 1..=2 {
                for p in list_presets() {
                    let s = verify_preset(&p, d, WeightParam::new(a).unwrap()).unwrap();
                    assert!(s.ok, "{} {d} {a} {}", p.name, s.max_residual);
                }
            }
        }
        let pair = build_preset("halfplane-pair", 1, WeightParam::new(0.0).unwrap()).unwrap();
        assert_eq!(pair.len(), 2);
        assert!(build_preset("nope", 1, WeightParam::new(0.0).unwrap()).is_err());
    }
}
