//! The Poisson formula for the backward extension problem,
//! `U(x₀,x,t) = ∫₀^∞∫ P_a(x₀,ξ,τ) u(x-ξ, t+τ) dξ dτ`.
//!
//! With `ξ = √τ z` and `s = x₀²/(4τ)` the kernel becomes
//! `2^{1-a} C s^{-(1+a)/2} e^{-s} e^{-|z|²/4}`. Time-dependent data turn
//! into functions of `t + x₀²/(4s)` with an essential singularity at `s = 0`,
//! so the `s` rule uses geometrically graded panels towards 0 (Gauss–Jacobi
//! on the innermost one) and a shifted Gauss–Laguerre tail; each `z`
//! direction uses Gauss–Hermite.

use crate::constants::WeightParam;
use crate::error::{domain, Error, Result};
use crate::kernels::SpaceTimePoint;
use crate::quad::{gauss_jacobi, gauss_laguerre, hermite_line, QuadRule, WeightKind};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PoissonOrders {
    /// Nodes per graded panel in `s ∈ (0, 1)`.
    pub panel: usize,
    /// Number of graded panels (the innermost ends at `2^{-levels}`).
    pub levels: usize,
    /// Gauss–Laguerre order on `(1, ∞)`.
    pub tail: usize,
    pub hermite: usize,
    /// Relative agreement required between the rule and its refinement.
    pub tol: f64,
}

impl Default for PoissonOrders {
    fn default() -> Self {
        PoissonOrders { panel: 12, levels: 40, tail: 32, hermite: 24, tol: 1e-6 }
    }
}

/// Rule for `∫₀^∞ s^α e^{-s} f(s) ds`.
fn s_rule(alpha: f64, panel: usize, levels: usize, tail: usize) -> Result<QuadRule> {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let b0 = 0.5f64.powi(levels as i32);
    let inner = gauss_jacobi(panel, 0.0, alpha)?;
    for (&x, &wx) in inner.nodes.iter().zip(&inner.weights) {
        let s = b0 * x;
        nodes.push(s);
        weights.push(wx * b0.powf(1.0 + alpha) * (-s).exp());
    }
    let leg = gauss_jacobi(panel, 0.0, 0.0)?;
    for k in 0..levels {
        let (lo, hi) = (b0 * 2f64.powi(k as i32), b0 * 2f64.powi(k as i32 + 1));
        for (&x, &wx) in leg.nodes.iter().zip(&leg.weights) {
            let s = lo + (hi - lo) * x;
            nodes.push(s);
            weights.push(wx * (hi - lo) * s.powf(alpha) * (-s).exp());
        }
    }
    let lag = gauss_laguerre(tail, 0.0)?;
    for (&u, &wu) in lag.nodes.iter().zip(&lag.weights) {
        nodes.push(1.0 + u);
        weights.push(wu * (-1.0f64).exp() * (1.0 + u).powf(alpha));
    }
    Ok(QuadRule { nodes, weights, weight: WeightKind::Laguerre { alpha } })
}

fn extend_with(u: &dyn Fn(&[f64], f64) -> f64, p: &SpaceTimePoint, lag: &QuadRule, her: &QuadRule) -> f64 {
    let d = p.x.len();
    let x0 = p.x0;
    let mut idx = vec![0usize; d];
    let mut xs = vec![0.0; d];
    let mut acc = 0.0;
    for (&s, &ws) in lag.nodes.iter().zip(&lag.weights) {
        let tau = x0 * x0 / (4.0 * s);
        let st = tau.sqrt();
        let mut inner = 0.0;
        idx.iter_mut().for_each(|i| *i = 0);
        loop {
            let mut wz = 1.0;
            for k in 0..d {
                xs[k] = p.x[k] - st * her.nodes[idx[k]];
                wz *= her.weights[idx[k]];
            }
            inner += wz * u(&xs, p.t + tau);
            let mut k = 0;
            while k < d {
                idx[k] += 1;
                if idx[k] < her.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
        }
        acc += ws * inner;
    }
    acc
}

/// `U` at `p` from boundary data `u(x, t)`; for `x₀ = 0` returns `u`. The
/// rule is compared against one with doubled orders to detect data that
/// grows too fast for the integral to converge.
pub fn poisson_extend(
    u: impl Fn(&[f64], f64) -> f64,
    p: &SpaceTimePoint,
    a: WeightParam,
    orders: PoissonOrders,
) -> Result<f64> {
    if p.x0 == 0.0 {
        return Ok(u(&p.x, p.t));
    }
    if orders.panel == 0 || orders.tail == 0 || orders.hermite == 0 {
        return domain("Poisson orders must be positive");
    }
    let av = a.get();
    let alpha = -(1.0 + av) / 2.0;
    // 2^{1-a} C_{d,a} (2√π)^d Γ((1-a)/2) = 1
    let norm = |lag: &QuadRule, her: &QuadRule| {
        let mass: f64 = lag.weights.iter().sum::<f64>() * her.weights.iter().sum::<f64>().powi(p.x.len() as i32);
        1.0 / mass
    };
    let lag = s_rule(alpha, orders.panel, orders.levels, orders.tail)?;
    let her = hermite_line(orders.hermite)?;
    let coarse = norm(&lag, &her) * extend_with(&u, p, &lag, &her);
    let lag2 = s_rule(alpha, 2 * orders.panel, orders.levels, 2 * orders.tail)?;
    let her2 = hermite_line(2 * orders.hermite)?;
    let fine = norm(&lag2, &her2) * extend_with(&u, p, &lag2, &her2);
    if !fine.is_finite() || (fine - coarse).abs() > orders.tol * fine.abs().max(1.0) {
        return Err(Error::Convergence(format!(
            "Poisson integral does not settle ({coarse:e} vs {fine:e}); boundary data may grow too fast"
        )));
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(a: f64) -> WeightParam {
        WeightParam::new(a).unwrap()
    }

    fn pt(x0: f64, x: &[f64], t: f64) -> SpaceTimePoint {
        SpaceTimePoint::new(x0, x.to_vec(), t).unwrap()
    }

    #[test]
    fn constants_and_coordinates_are_reproduced() {
        for &a in &[-0.5, 0.0, 0.5] {
            for p in [pt(0.7, &[0.3], 0.5), pt(2.0, &[-1.0, 0.4], 1.0)] {
                assert!((poisson_extend(|_, _| 1.0, &p, w(a), PoissonOrders::default()).unwrap() - 1.0).abs() < 1e-12);
                let v = poisson_extend(|x, _| x[0], &p, w(a), PoissonOrders::default()).unwrap();
                assert!((v - p.x[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn boundary_limit() {
        // bounded data with time dependence
        let u = |x: &[f64], t: f64| x[0].sin() * (-t).exp() + 0.5 * (2.0 * x[0]).cos();
        for &a in &[-0.5, 0.0, 0.5] {
            for &(x, t) in &[(0.3, 0.0), (-1.2, 0.7), (2.0, 1.5)] {
                let x0 = 1e-8f64.powf(1.0 / (1.0 - a));
                let v = poisson_extend(u, &pt(x0, &[x], t), w(a), PoissonOrders::default()).unwrap();
                assert!((v - u(&[x], t)).abs() < 1e-4, "a={a} x={x}");
            }
        }
    }

    #[test]
    fn a0_time_only_data_matches_levy_transform() {
        // for a = 0 the τ-marginal of the kernel is the Lévy first-passage
        // law, whose Laplace transform is e^{-x₀√λ}
        for &lam in &[0.5, 1.0, 3.0] {
            let p = pt(0.8, &[0.4], 0.3);
            let v = poisson_extend(|_, t| (-lam * t).exp(), &p, w(0.0), PoissonOrders::default()).unwrap();
            let exact = (-lam * 0.3 - 0.8 * f64::sqrt(lam)).exp();
            assert!((v - exact).abs() < 1e-7, "lam={lam}: {v} vs {exact}");
        }
    }

    #[test]
    fn growing_data_rejected() {
        let p = pt(1.0, &[0.0], 0.0);
        assert!(poisson_extend(|x, _| x[0] * x[0], &p, w(0.0), PoissonOrders::default()).is_err());
    }
}
