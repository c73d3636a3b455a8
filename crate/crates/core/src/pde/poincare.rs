//! The weighted Poincaré inequality on balls,
//! `∫V²|y₀|ᵃ ≤ R²/(N+a+1) ∫|∇V|²|y₀|ᵃ` for `V` vanishing near `∂𝔻_R`.

use crate::constants::WeightParam;
use crate::error::{domain, Result};
use crate::field::ScalarField;
use crate::quad::{AngularOrders, HalfBallRule};

/// `R²/(N+a+1)·∫|∇V|²|y₀|ᵃ - ∫V²|y₀|ᵃ` over the full ball.
pub fn poincare_check(
    v: &impl ScalarField,
    r: f64,
    big_n: usize,
    a: WeightParam,
    radial_order: usize,
    orders: AngularOrders,
) -> Result<f64> {
    if v.dim() != big_n + 1 {
        return domain(format!("field has dimension {}, expected {}", v.dim(), big_n + 1));
    }
    if !(r > 0.0) {
        return domain(format!("radius must be positive, got {r}"));
    }
    let rule = HalfBallRule::plain(big_n, a, radial_order, orders)?;
    let grad = rule.integrate_full(r, |y| v.grad_norm2(y))?;
    let mass = rule.integrate_full(r, |y| v.value(y).powi(2))?;
    Ok(r * r / (big_n as f64 + a.get() + 1.0) * grad - mass)
}

/// Smooth compactly supported bumps `(1 - |Y-c|²/s²)³₊` used as the
/// Poincaré test suite.
#[derive(Clone, Debug)]
pub struct Bump {
    pub center: Vec<f64>,
    pub width: f64,
    pub scale: f64,
}

impl ScalarField for Bump {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, y: &[f64]) -> f64 {
        let q: f64 = y.iter().zip(&self.center).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (self.width * self.width);
        if q < 1.0 {
            self.scale * (1.0 - q).powi(3)
        } else {
            0.0
        }
    }

    fn gradient(&self, y: &[f64], g: &mut [f64]) {
        let w2 = self.width * self.width;
        let q: f64 = y.iter().zip(&self.center).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / w2;
        let f = if q < 1.0 { -6.0 * self.scale * (1.0 - q).powi(2) / w2 } else { 0.0 };
        for k in 0..g.len() {
            g[k] = f * (y[k] - self.center[k]);
        }
    }
}

/// Bumps centred on the `y₀` axis and off it, all supported in `𝔻_R`.
pub fn bump_suite(big_n: usize, r: f64) -> Vec<Bump> {
    let mut out = Vec::new();
    for &(c0, c1, width) in &[
        (0.0, 0.0, 1.0),
        (0.0, 0.0, 0.6),
        (0.3, 0.0, 0.6),
        (0.0, 0.35, 0.6),
        (-0.2, 0.2, 0.5),
        (0.5, -0.3, 0.4),
        (0.0, -0.5, 0.45),
        (0.1, 0.6, 0.35),
        (0.7, 0.0, 0.3),
        (0.0, 0.0, 0.25),
    ] {
        let mut center = vec![0.0; big_n + 1];
        center[0] = c0 * r;
        center[1] = c1 * r;
        out.push(Bump { center, width: width * r, scale: 1.0 });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(a: f64) -> WeightParam {
        WeightParam::new(a).unwrap()
    }

    struct Radial;

    impl ScalarField for Radial {
        fn dim(&self) -> usize {
            3
        }
        fn value(&self, y: &[f64]) -> f64 {
            (1.0 - y.iter().map(|v| v * v).sum::<f64>()).powi(2)
        }
        fn gradient(&self, y: &[f64], g: &mut [f64]) {
            let s = 1.0 - y.iter().map(|v| v * v).sum::<f64>();
            for k in 0..3 {
                g[k] = -4.0 * s * y[k];
            }
        }
    }

    #[test]
    fn radial_bump_slack_positive() {
        let o = AngularOrders::default();
        for &a in &[0.0, 0.5] {
            let s = poincare_check(&Radial, 1.0, 2, w(a), 16, o).unwrap();
            assert!(s > 0.0);
        }
        // a = 0 closed form: ∫(1-ρ²)⁴ρ²·4π = 4π·128/3465, gradient 4π·64/315 ... slack = (1/3)·∫|∇V|² - ∫V²
        let grad = 4.0 * std::f64::consts::PI * 16.0 * 8.0 / 315.0;
        let mass = 4.0 * std::f64::consts::PI * 128.0 / 3465.0;
        let s = poincare_check(&Radial, 1.0, 2, w(0.0), 16, o).unwrap();
        assert!((s - (grad / 3.0 - mass)).abs() < 1e-12, "{s}");
    }

    #[test]
    fn slack_is_quadratic_in_scale() {
        let o = AngularOrders::default();
        let b = Bump { center: vec![0.1, 0.2, 0.0], width: 0.5, scale: 1.0 };
        let b3 = Bump { scale: 3.0, ..b.clone() };
        let s1 = poincare_check(&b, 1.0, 2, w(-0.5), 24, o).unwrap();
        let s3 = poincare_check(&b3, 1.0, 2, w(-0.5), 24, o).unwrap();
        assert!((s3 / s1 - 9.0).abs() < 1e-10);
    }

    #[test]
    fn suite_slacks_nonnegative() {
        let o = AngularOrders::default();
        for big_n in [2usize, 3] {
            for &a in &[-0.5, 0.5] {
                for b in bump_suite(big_n, 1.0) {
                    assert!(poincare_check(&b, 1.0, big_n, w(a), 24, o).unwrap() >= 0.0);
                }
            }
        }
    }
}
