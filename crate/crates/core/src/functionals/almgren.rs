//! Almgren frequencies `L(r) = rD/H` (elliptic) and `ℒ(t) = t𝒟/ℋ`
//! (parabolic), plus the Gaussian-weighted energies they are built from.

use serde::{Deserialize, Serialize};

use super::trace::{check_grid, FrequencyTrace, TraceParam};
use super::{local_derivative, FD_REL_STEP};
use crate::constants::{weighted_half_sphere_measure, WeightParam};
use crate::error::{Error, Result};
use crate::field::{ScalarField, SpaceTimeField};
use crate::quad::{AngularOrders, HalfBallRule, HalfSphereRule, HalfspaceGaussRule};

/// Mean square of `V` on the sphere below which `L` is reported undefined.
pub const HEIGHT_TOL: f64 = 1e-24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipticOrders {
    pub radial: usize,
    pub angular: AngularOrders,
}

impl Default for EllipticOrders {
    fn default() -> Self {
        EllipticOrders { radial: 16, angular: AngularOrders::default() }
    }
}

/// Half-sphere and half-ball rules for one `(N, a)`.
#[derive(Clone, Debug)]
pub struct EllipticRules {
    pub big_n: usize,
    pub a: WeightParam,
    pub sphere: HalfSphereRule,
    pub ball: HalfBallRule,
}

impl EllipticRules {
    pub fn new(big_n: usize, a: WeightParam, orders: EllipticOrders) -> Result<Self> {
        let ball = HalfBallRule::plain(big_n, a, orders.radial, orders.angular)?;
        Ok(EllipticRules { big_n, a, sphere: ball.sphere.clone(), ball })
    }

    fn check_dim(&self, v: &impl ScalarField) -> Result<()> {
        if v.dim() != self.big_n + 1 {
            return Err(Error::Domain(format!("field has dimension {}, rules expect {}", v.dim(), self.big_n + 1)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Hdl {
    pub h: f64,
    pub d: f64,
    /// Absent where `H` vanishes.
    pub l: Option<f64>,
}

pub fn elliptic_hdl(v: &impl ScalarField, r: f64, rules: &EllipticRules) -> Result<Hdl> {
    rules.check_dim(v)?;
    let h = rules.sphere.integrate(r, |y| {
        let x = v.value(y);
        x * x
    })?;
    let d = rules.ball.integrate(r, |y| v.grad_norm2(y))?;
    let mean = h / weighted_half_sphere_measure(rules.big_n as f64, r, rules.a)?;
    let l = (mean > HEIGHT_TOL).then(|| r * d / h);
    Ok(Hdl { h, d, l })
}

fn frequency(v: &impl ScalarField, r: f64, rules: &EllipticRules) -> Result<f64> {
    elliptic_hdl(v, r, rules)?.l.ok_or_else(|| Error::Check {
        name: "almgren-elliptic".into(),
        detail: format!("frequency undefined at r = {r} (H vanishes)"),
    })
}

/// Elliptic Almgren trace `r ↦ L(r)`.
pub fn elliptic_almgren_trace(v: &impl ScalarField, radii: &[f64], rules: &EllipticRules) -> Result<FrequencyTrace> {
    check_grid(radii)?;
    let values = radii.iter().map(|&r| frequency(v, r, rules)).collect::<Result<Vec<_>>>()?;
    FrequencyTrace::new(TraceParam::R, radii.to_vec(), values)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlackReport {
    pub grid: Vec<f64>,
    pub slack: Vec<f64>,
    pub min_slack: f64,
}

impl SlackReport {
    pub(crate) fn new(grid: Vec<f64>, slack: Vec<f64>) -> Self {
        let min_slack = slack.iter().cloned().fold(f64::INFINITY, f64::min);
        SlackReport { grid, slack, min_slack }
    }
}

/// Slack of `L'(r)H² ≥ 2(∫_ℍ V Y·∇V)(∫_𝔻 VK) - 2H∫_𝔻 (Y·∇V)K` at each radius,
/// where `V` solves `L_a V = K`.
pub fn almgren_elliptic_bound_check(
    v: &impl ScalarField,
    k: impl Fn(&[f64]) -> f64 + Sync,
    radii: &[f64],
    rules: &EllipticRules,
) -> Result<SlackReport> {
    rules.check_dim(v)?;
    let dim = rules.big_n + 1;
    let radial = |y: &[f64]| {
        let mut g = [0.0f64; 32];
        let g = &mut g[..dim];
        let x = v.value_and_gradient(y, g);
        (x, y.iter().zip(g.iter()).map(|(a, b)| a * b).sum::<f64>())
    };
    let mut slack = Vec::with_capacity(radii.len());
    for &r in radii {
        let dl = local_derivative(|s| frequency(v, s, rules), r, FD_REL_STEP * r)?;
        let hdl = elliptic_hdl(v, r, rules)?;
        let vyv = rules.sphere.integrate(r, |y| {
            let (x, yg) = radial(y);
            x * yg
        })?;
        let vk = rules.ball.integrate(r, |y| v.value(y) * k(y))?;
        let ygk = rules.ball.integrate(r, |y| radial(y).1 * k(y))?;
        let rhs = 2.0 * vyv * vk - 2.0 * hdl.h * ygk;
        slack.push(dl * hdl.h * hdl.h - rhs);
    }
    Ok(SlackReport::new(radii.to_vec(), slack))
}

/// The Gaussian-weighted energies at one time, all as `∫ · x₀ᵃ𝒢(X,t) dX`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ParabolicFunctionals {
    /// `ℋ = ∫U²`.
    pub height: f64,
    /// `𝒟 = ∫|∇U|²`.
    pub dirichlet: f64,
    /// `𝒯 = ∫(∂ₜU)²`.
    pub time_energy: f64,
    /// `ℐ = ∫(X·∇U + 2t∂ₜU)²`.
    pub scaling: f64,
    /// `𝒥 = ∫J²`.
    pub j2: f64,
    /// `ℳ = ∫UJ`.
    pub mixed: f64,
    /// `𝒥` with `J` replaced by `J⁻ = max(-J, 0)`.
    pub j2_minus: f64,
    pub mixed_minus: f64,
}

fn grad_dot_x(u: &impl SpaceTimeField, x: &[f64], t: f64) -> (f64, f64) {
    let mut g = [0.0f64; 32];
    let g = &mut g[..x.len()];
    u.gradient(x, t, g);
    (g.iter().map(|v| v * v).sum(), x.iter().zip(g.iter()).map(|(a, b)| a * b).sum())
}

pub fn parabolic_functionals(
    u: &impl SpaceTimeField,
    t: f64,
    rule: &HalfspaceGaussRule,
) -> Result<ParabolicFunctionals> {
    check_space_dim(u, rule)?;
    let height = rule.integrate(t, |x| u.value(x, t).powi(2))?;
    let dirichlet = rule.integrate(t, |x| grad_dot_x(u, x, t).0)?;
    let time_energy = rule.integrate(t, |x| u.dt(x, t).powi(2))?;
    let scaling = rule.integrate(t, |x| (grad_dot_x(u, x, t).1 + 2.0 * t * u.dt(x, t)).powi(2))?;
    let j2 = rule.integrate(t, |x| u.source_j(x, t).powi(2))?;
    let mixed = rule.integrate(t, |x| u.value(x, t) * u.source_j(x, t))?;
    let j2_minus = rule.integrate(t, |x| (-u.source_j(x, t)).max(0.0).powi(2))?;
    let mixed_minus = rule.integrate(t, |x| u.value(x, t) * (-u.source_j(x, t)).max(0.0))?;
    Ok(ParabolicFunctionals { height, dirichlet, time_energy, scaling, j2, mixed, j2_minus, mixed_minus })
}

pub(crate) fn check_space_dim(u: &impl SpaceTimeField, rule: &HalfspaceGaussRule) -> Result<()> {
    if u.space_dim() != rule.d + 1 {
        return Err(Error::Domain(format!("field has {} space variables, rule expects {}", u.space_dim(), rule.d + 1)));
    }
    Ok(())
}

/// `(ℋ, 𝒟)` only.
pub fn height_dirichlet(u: &impl SpaceTimeField, t: f64, rule: &HalfspaceGaussRule) -> Result<(f64, f64)> {
    check_space_dim(u, rule)?;
    Ok((rule.integrate(t, |x| u.value(x, t).powi(2))?, rule.integrate(t, |x| grad_dot_x(u, x, t).0)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlmgrenTrace {
    pub trace: FrequencyTrace,
    /// Grid indices where `ℋ` vanishes; their values are NaN.
    pub flagged: Vec<usize>,
}

pub fn parabolic_almgren_trace(
    u: &impl SpaceTimeField,
    times: &[f64],
    rule: &HalfspaceGaussRule,
) -> Result<AlmgrenTrace> {
    check_grid(times)?;
    let mut values = Vec::with_capacity(times.len());
    let mut flagged = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let (h, d) = height_dirichlet(u, t, rule)?;
        if h > HEIGHT_TOL {
            values.push(t * d / h);
        } else {
            flagged.push(i);
            values.push(f64::NAN);
        }
    }
    Ok(AlmgrenTrace { trace: FrequencyTrace::new(TraceParam::T, times.to_vec(), values)?, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::trace::{geometric_grid, monotonicity_scan};
    use crate::pde::{orthonormalize_modes, ClosedForm, ClosedFormSolution};
    use crate::poly::Poly;
    use crate::quad::GaussOrders;

    fn w(a: f64) -> WeightParam {
        WeightParam::new(a).unwrap()
    }

    fn cf(s: ClosedFormSolution, d: usize, a: f64) -> ClosedForm {
        ClosedForm::new(s, d, w(a)).unwrap()
    }

    #[test]
    fn mode_frequency_equals_degree() {
        for &(n, a) in &[(2usize, 0.5), (3, -0.5)] {
            let basis = orthonormalize_modes(3, n, w(a), AngularOrders::default()).unwrap();
            let rules = EllipticRules::new(n, w(a), EllipticOrders::default()).unwrap();
            for m in &basis.modes[1..] {
                for &r in &[0.2, 0.5, 1.0, 1.7] {
                    let hdl = elliptic_hdl(&m.poly, r, &rules).unwrap();
                    assert!((r * hdl.d - m.degree as f64 * hdl.h).abs() < 1e-8 * hdl.h.max(1e-300), "{n} {a} {r}");
                }
            }
        }
    }

    #[test]
    fn constant_and_coordinate() {
        let rules = EllipticRules::new(2, w(0.5), EllipticOrders::default()).unwrap();
        let c = Poly::constant(3, 2.0);
        let hdl = elliptic_hdl(&c, 0.7, &rules).unwrap();
        assert_eq!(hdl.d, 0.0);
        assert_eq!(hdl.l, Some(0.0));
        let y1 = Poly::var(3, 1);
        assert!((elliptic_hdl(&y1, 0.3, &rules).unwrap().l.unwrap() - 1.0).abs() < 1e-12);
        assert!(elliptic_hdl(&Poly::zero(3), 1.0, &rules).unwrap().l.is_none());
    }

    #[test]
    fn bound_check_for_modes_and_mixtures() {
        let a = w(-0.5);
        let basis = orthonormalize_modes(2, 2, a, AngularOrders::default()).unwrap();
        let rules = EllipticRules::new(2, a, EllipticOrders::default()).unwrap();
        let radii = geometric_grid(0.2, 1.0, 12).unwrap();
        let j1 = basis.of_degree(1).next().unwrap().0;
        let j2 = basis.of_degree(2).next().unwrap().0;
        let pure = basis.combine(&[(j2, 1.0)]);
        let rep = almgren_elliptic_bound_check(&pure, |_| 0.0, &radii, &rules).unwrap();
        assert!(rep.slack.iter().all(|s| s.abs() < 1e-6), "{rep:?}");
        let mix = basis.combine(&[(j1, 1.0), (j2, 0.8)]);
        let rep = almgren_elliptic_bound_check(&mix, |_| 0.0, &radii, &rules).unwrap();
        assert!(rep.slack.iter().all(|&s| s > 0.0), "{rep:?}");
        let tr = elliptic_almgren_trace(&mix, &radii, &rules).unwrap();
        assert!(tr.fd_derivatives.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn coordinate_functionals() {
        for &(d, a) in &[(1usize, 0.0), (2, 0.5), (1, -0.5)] {
            let rule = HalfspaceGaussRule::new(d, w(a), GaussOrders::default()).unwrap();
            let u = cf(ClosedFormSolution::Coordinate(1), d, a);
            for &t in &[0.3, 1.0, 4.0] {
                let f = parabolic_functionals(&u, t, &rule).unwrap();
                assert!((f.height - 2.0 * t).abs() < 1e-10 * t);
                assert!((f.dirichlet - 1.0).abs() < 1e-10);
                assert!((f.scaling - 2.0 * t).abs() < 1e-10 * t);
                assert_eq!((f.time_energy, f.j2, f.mixed), (0.0, 0.0, 0.0));
            }
        }
    }

    #[test]
    fn caloric_quadratic_moments() {
        for &(d, a) in &[(1usize, 0.5), (2, -0.5)] {
            let c = d as f64 + 1.0 + a;
            let rule = HalfspaceGaussRule::new(d, w(a), GaussOrders::default()).unwrap();
            let u = cf(ClosedFormSolution::CaloricQuadratic, d, a);
            let t = 0.8;
            let f = parabolic_functionals(&u, t, &rule).unwrap();
            assert!((f.height - 8.0 * t * t * c).abs() < 1e-10);
            assert!((f.dirichlet - 8.0 * t * c).abs() < 1e-10);
            assert!((f.time_energy - 4.0 * c * c).abs() < 1e-10);
            assert!(f.j2.abs() < 1e-20);
        }
    }

    #[test]
    fn parabolic_frequency_traces() {
        let times = geometric_grid(0.1, 10.0, 200).unwrap();
        for &a in &[-0.5, 0.0, 0.5] {
            let rule = HalfspaceGaussRule::new(1, w(a), GaussOrders::default()).unwrap();
            let x1 = parabolic_almgren_trace(&cf(ClosedFormSolution::Coordinate(1), 1, a), &times, &rule).unwrap();
            assert!(x1.trace.values.iter().all(|v| (v - 0.5).abs() < 1e-10));
            let q = parabolic_almgren_trace(&cf(ClosedFormSolution::CaloricQuadratic, 1, a), &times, &rule).unwrap();
            assert!(q.trace.values.iter().all(|v| (v - 1.0).abs() < 1e-10));
            let mix = ClosedFormSolution::LinearCombination(vec![
                (1.0, ClosedFormSolution::Coordinate(1)),
                (1.0, ClosedFormSolution::CaloricQuadratic),
            ]);
            let m = parabolic_almgren_trace(&cf(mix, 1, a), &times, &rule).unwrap();
            let c = 2.0 + a;
            for (t, v) in times.iter().zip(&m.trace.values) {
                let exact = (1.0 + 8.0 * t * c) / (2.0 + 8.0 * t * c);
                assert!((v - exact).abs() < 1e-10);
            }
            assert!(monotonicity_scan(&m.trace, 1e-6).is_empty());
        }
    }

    #[test]
    fn flagged_where_height_vanishes() {
        let rule = HalfspaceGaussRule::new(1, w(0.0), GaussOrders::default()).unwrap();
        let z = cf(ClosedFormSolution::Constant(0.0), 1, 0.0);
        let tr = parabolic_almgren_trace(&z, &[1.0, 2.0, 3.0], &rule).unwrap();
        assert_eq!(tr.flagged, vec![0, 1, 2]);
    }

    #[test]
    fn frequency_scale_invariant() {
        let rule = HalfspaceGaussRule::new(1, w(0.3), GaussOrders::default()).unwrap();
        let base = ClosedFormSolution::LinearCombination(vec![
            (1.0, ClosedFormSolution::Coordinate(1)),
            (0.4, ClosedFormSolution::CaloricQuadratic),
        ]);
        let times = [0.5, 1.0, 2.0];
        let l1 = parabolic_almgren_trace(&cf(base.clone(), 1, 0.3), &times, &rule).unwrap();
        for lam in [-3.0, 1e-3, 250.0] {
            let s = ClosedFormSolution::LinearCombination(vec![(lam, base.clone())]);
            let l2 = parabolic_almgren_trace(&cf(s, 1, 0.3), &times, &rule).unwrap();
            for (x, y) in l1.trace.values.iter().zip(&l2.trace.values) {
                assert!((x - y).abs() < 1e-13);
            }
        }
    }
}
