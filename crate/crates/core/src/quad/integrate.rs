//! Tensor integrators over weighted half-spaces, half-spheres and half-balls.
//!
//! Node sets are built once and reused across radii and times. Sums run in
//! parallel over fixed-size chunks whose partial sums are combined in index
//! order, so results do not depend on the thread count.

use rayon::prelude::*;

use super::rules::{freud_halfline, gauss_jacobi, gauss_jacobi_symmetric, hermite_line, truncated_radial};
use crate::constants::{log_gaussian_limit_constant, WeightParam};
use crate::error::{domain, Error, Result};

const CHUNK: usize = 256;

/// Sum `Σ w_i f(map(p_i))` over a flat point list with deterministic
/// chunked reduction. `map` writes the evaluation point into the buffer.
pub(crate) fn chunked_sum<F, M>(count: usize, dim: usize, map: M, f: F) -> Result<f64>
where
    M: Fn(usize, &mut [f64]) -> f64 + Sync,
    F: Fn(&[f64]) -> f64 + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let partial: Vec<Result<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut buf = vec![0.0; dim];
            let mut acc = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(count) {
                let w = map(i, &mut buf);
                let v = f(&buf);
                if !v.is_finite() {
                    return Err(Error::Quadrature(format!("non-finite integrand {v} at node {buf:?}")));
                }
                acc += w * v;
            }
            Ok(acc)
        })
        .collect();
    let mut total = 0.0;
    for p in partial {
        total += p?;
    }
    Ok(total)
}

/// Angular resolution for sphere rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct AngularOrders {
    /// Gauss order in each polar coordinate (rounded up to even).
    pub polar: usize,
    /// Points on each great circle (rounded up to a multiple of 4).
    pub circle: usize,
}

impl Default for AngularOrders {
    fn default() -> Self {
        AngularOrders { polar: 16, circle: 32 }
    }
}

impl AngularOrders {
    fn normalized(self) -> Result<Self> {
        if self.polar == 0 || self.circle == 0 {
            return domain("angular orders must be positive");
        }
        Ok(AngularOrders { polar: self.polar + self.polar % 2, circle: self.circle.div_ceil(4) * 4 })
    }
}

/// Quadrature on the unit sphere `𝕊^{dim-1} ⊂ ℝ^dim` with surface measure.
/// No node lies on a coordinate hyperplane, so sign changes across
/// `yᵢ = 0` split the rule into mirror-symmetric halves.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub dim: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(dim: usize, orders: AngularOrders) -> Result<Self> {
        let orders = orders.normalized()?;
        match dim {
            0 => domain("sphere dimension must be positive"),
            1 => Ok(SphereRule { dim, points: vec![-1.0, 1.0], weights: vec![1.0, 1.0] }),
            2 => {
                let l = orders.circle;
                let h = 2.0 * std::f64::consts::PI / l as f64;
                let mut points = Vec::with_capacity(2 * l);
                for k in 0..l {
                    let th = (k as f64 + 0.5) * h;
                    points.push(th.cos());
                    points.push(th.sin());
                }
                Ok(SphereRule { dim, points, weights: vec![h; l] })
            }
            _ => {
                let e = (dim as f64 - 3.0) / 2.0;
                let zr = gauss_jacobi_symmetric(orders.polar, e, e)?;
                let sub = SphereRule::new(dim - 1, orders)?;
                let mut points = Vec::new();
                let mut weights = Vec::new();
                for (&z, &wz) in zr.nodes.iter().zip(&zr.weights) {
                    let s = (1.0 - z * z).sqrt();
                    for (j, &ws) in sub.weights.iter().enumerate() {
                        points.push(z);
                        points.extend(sub.points[j * (dim - 1)..(j + 1) * (dim - 1)].iter().map(|v| s * v));
                        weights.push(wz * ws);
                    }
                }
                Ok(SphereRule { dim, points, weights })
            }
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

/// Rule for `∫_{ℍᴺ_1} g y₀ᵃ dη` on the unit upper half-sphere of `ℝᴺ⁺¹`.
/// The polar coordinate is `y₀` itself, so integrands odd in `y₀` stay
/// polynomial in the quadrature variable.
#[derive(Clone, Debug)]
pub struct HalfSphereRule {
    pub big_n: usize,
    pub a: WeightParam,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl HalfSphereRule {
    pub fn new(big_n: usize, a: WeightParam, orders: AngularOrders) -> Result<Self> {
        if big_n == 0 {
            return domain("half-sphere needs N >= 1");
        }
        let orders = orders.normalized()?;
        let e = (big_n as f64 - 2.0) / 2.0;
        let cr = gauss_jacobi(orders.polar, e, a.get())?;
        let sub = SphereRule::new(big_n, orders)?;
        let stride = big_n + 1;
        let mut points = Vec::with_capacity(cr.len() * sub.len() * stride);
        let mut weights = Vec::with_capacity(cr.len() * sub.len());
        for (&c, &wc) in cr.nodes.iter().zip(&cr.weights) {
            let s = (1.0 - c * c).sqrt();
            let wc = wc * (1.0 + c).powf(e);
            for j in 0..sub.len() {
                points.push(c);
                points.extend(sub.point(j).iter().map(|v| s * v));
                weights.push(wc * sub.weights[j]);
            }
        }
        Ok(HalfSphereRule { big_n, a, points, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let s = self.big_n + 1;
        &self.points[i * s..(i + 1) * s]
    }

    /// `∫_{ℍᴺ_r} g y₀ᵃ dη`.
    pub fn integrate(&self, r: f64, g: impl Fn(&[f64]) -> f64 + Sync) -> Result<f64> {
        check_radius(r)?;
        let dim = self.big_n + 1;
        let s = chunked_sum(
            self.len(),
            dim,
            |i, buf| {
                for (b, p) in buf.iter_mut().zip(self.point(i)) {
                    *b = r * p;
                }
                self.weights[i]
            },
            g,
        )?;
        Ok(s * r.powf(self.big_n as f64 + self.a.get()))
    }

    /// Same over the full sphere with weight `|y₀|ᵃ`.
    pub fn integrate_full(&self, r: f64, g: impl Fn(&[f64]) -> f64 + Sync) -> Result<f64> {
        self.integrate(r, mirrored(self.big_n + 1, g))
    }
}

fn mirrored<'a>(dim: usize, g: impl Fn(&[f64]) -> f64 + Sync + 'a) -> impl Fn(&[f64]) -> f64 + Sync + 'a {
    move |y: &[f64]| {
        let mut m = [0.0f64; 16];
        let v = g(y);
        if dim <= 16 {
            m[..dim].copy_from_slice(y);
            m[0] = -m[0];
            v + g(&m[..dim])
        } else {
            let mut mv = y.to_vec();
            mv[0] = -mv[0];
            v + g(&mv)
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("radius must be positive, got {r}"));
    }
    Ok(())
}

/// Rule for `∫_{𝔻ᴺ⁺¹_r ∩ {y₀>0}} f(Y) |Y|^p (1-|Y|²/r²)^m y₀ᵃ dY`.
/// The radial factors are absorbed into the radial weight, so `p` may be as
/// negative as `-(N+a)` (exclusive) without a singular node.
#[derive(Clone, Debug)]
pub struct HalfBallRule {
    pub sphere: HalfSphereRule,
    pub radial_nodes: Vec<f64>,
    pub radial_weights: Vec<f64>,
    pub p: f64,
    pub m: f64,
}

impl HalfBallRule {
    pub fn new(
        big_n: usize,
        a: WeightParam,
        radial_order: usize,
        orders: AngularOrders,
        p: f64,
        m: f64,
    ) -> Result<Self> {
        let sphere = HalfSphereRule::new(big_n, a, orders)?;
        let beta = big_n as f64 + a.get() + p;
        let rr = truncated_radial(radial_order, beta, m)?;
        Ok(HalfBallRule { sphere, radial_nodes: rr.nodes, radial_weights: rr.weights, p, m })
    }

    /// Plain weighted half-ball rule (`p = 0`, `m = 0`).
    pub fn plain(big_n: usize, a: WeightParam, radial_order: usize, orders: AngularOrders) -> Result<Self> {
        Self::new(big_n, a, radial_order, orders, 0.0, 0.0)
    }

    /// Rule with the Γ-type weight `|Y|^{-(N-1+a)}`.
    pub fn gamma_weighted(big_n: usize, a: WeightParam, radial_order: usize, orders: AngularOrders) -> Result<Self> {
        Self::new(big_n, a, radial_order, orders, -(big_n as f64 - 1.0 + a.get()), 0.0)
    }

    pub fn big_n(&self) -> usize {
        self.sphere.big_n
    }

    pub fn integrate(&self, r: f64, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<f64> {
        check_radius(r)?;
        let dim = self.big_n() + 1;
        let na = self.sphere.len();
        let count = na * self.radial_nodes.len();
        let s = chunked_sum(
            count,
            dim,
            |i, buf| {
                let (ir, ia) = (i / na, i % na);
                let rho = r * self.radial_nodes[ir];
                for (b, p) in buf.iter_mut().zip(self.sphere.point(ia)) {
                    *b = rho * p;
                }
                self.radial_weights[ir] * self.sphere.weights[ia]
            },
            f,
        )?;
        let big_n = self.big_n() as f64;
        Ok(s * r.powf(big_n + self.sphere.a.get() + self.p + 1.0))
    }

    /// Same over the full ball with weight `|y₀|ᵃ`.
    pub fn integrate_full(&self, r: f64, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<f64> {
        self.integrate(r, mirrored(self.big_n() + 1, f))
    }
}

/// Orders for the half-space Gaussian tensor rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GaussOrders {
    pub freud: usize,
    /// Use an even order so no node sits on `xᵢ = 0`.
    pub hermite: usize,
}

impl Default for GaussOrders {
    fn default() -> Self {
        GaussOrders { freud: 32, hermite: 32 }
    }
}

/// Rule for `∫_{ℝ^{d+1}_+} f(X) x₀ᵃ 𝒢(X,t) dX` via `X = √t Z`.
#[derive(Clone, Debug)]
pub struct HalfspaceGaussRule {
    pub d: usize,
    pub a: WeightParam,
    /// Nodes in `Z`, stride `d + 1`.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl HalfspaceGaussRule {
    pub fn new(d: usize, a: WeightParam, orders: GaussOrders) -> Result<Self> {
        if d == 0 {
            return domain("spatial dimension must be positive");
        }
        let fr = freud_halfline(orders.freud, a.get())?;
        let he = hermite_line(orders.hermite)?;
        let c = log_gaussian_limit_constant(d, a).exp();
        let mh = he.len();
        let total = fr.len() * mh.pow(d as u32);
        let mut points = Vec::with_capacity(total * (d + 1));
        let mut weights = Vec::with_capacity(total);
        for (&z0, &w0) in fr.nodes.iter().zip(&fr.weights) {
            for flat in 0..mh.pow(d as u32) {
                let mut w = c * w0;
                points.push(z0);
                let mut rem = flat;
                for _ in 0..d {
                    let k = rem % mh;
                    rem /= mh;
                    points.push(he.nodes[k]);
                    w *= he.weights[k];
                }
                weights.push(w);
            }
        }
        Ok(HalfspaceGaussRule { d, a, points, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `∫ f(X) x₀ᵃ 𝒢(X,t) dX`.
    pub fn integrate(&self, t: f64, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return domain(format!("time must be positive, got {t}"));
        }
        let st = t.sqrt();
        let dim = self.d + 1;
        chunked_sum(
            self.len(),
            dim,
            |i, buf| {
                for (b, z) in buf.iter_mut().zip(&self.points[i * dim..(i + 1) * dim]) {
                    *b = st * z;
                }
                self.weights[i]
            },
            f,
        )
    }
}

/// One-shot convenience wrapper around [`HalfspaceGaussRule`].
pub fn integrate_halfspace_gaussian(
    f: impl Fn(&[f64]) -> f64 + Sync,
    t: f64,
    d: usize,
    a: WeightParam,
    orders: GaussOrders,
) -> Result<f64> {
    HalfspaceGaussRule::new(d, a, orders)?.integrate(t, f)
}

/// One-shot `∫_{𝔻ᴺ⁺¹_r} f y₀ᵃ dY`.
pub fn integrate_half_ball_weighted(
    f: impl Fn(&[f64]) -> f64 + Sync,
    big_n: usize,
    r: f64,
    a: WeightParam,
    radial_order: usize,
    orders: AngularOrders,
) -> Result<f64> {
    HalfBallRule::plain(big_n, a, radial_order, orders)?.integrate(r, f)
}

/// One-shot `∫_{ℍᴺ_r} g y₀ᵃ dη`.
pub fn integrate_half_sphere_weighted(
    g: impl Fn(&[f64]) -> f64 + Sync,
    big_n: usize,
    r: f64,
    a: WeightParam,
    orders: AngularOrders,
) -> Result<f64> {
    HalfSphereRule::new(big_n, a, orders)?.integrate(r, g)
}

/// One-shot `∫_{𝔻_r} f |Y|^{-(N-1+a)} y₀ᵃ dY`.
pub fn integrate_gamma_weighted_ball(
    f: impl Fn(&[f64]) -> f64 + Sync,
    big_n: usize,
    r: f64,
    a: WeightParam,
    radial_order: usize,
    orders: AngularOrders,
) -> Result<f64> {
    HalfBallRule::gamma_weighted(big_n, a, radial_order, orders)?.integrate(r, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{weighted_half_ball_volume, weighted_half_sphere_measure};

    fn w(a: f64) -> WeightParam {
        WeightParam::new(a).unwrap()
    }

    fn rel(x: f64, y: f64) -> f64 {
        (x - y).abs() / y.abs().max(1e-300)
    }

    #[test]
    fn sphere_areas_from_rule() {
        for dim in 1..=5 {
            let s = SphereRule::new(dim, AngularOrders::default()).unwrap();
            let area: f64 = s.weights.iter().sum();
            let exact = crate::constants::sphere_area(dim as f64 - 1.0).unwrap();
            assert!(rel(area, exact) < 1e-13, "dim={dim}");
            for i in 0..s.len() {
                let n2: f64 = s.point(i).iter().map(|v| v * v).sum();
                assert!((n2 - 1.0).abs() < 1e-14);
                assert!(s.point(i).iter().all(|&v| v != 0.0));
            }
        }
    }

    #[test]
    fn half_sphere_mass() {
        for &(n, a) in &[(1usize, 0.0), (2, 0.0), (2, 0.5), (3, -0.5), (4, 0.9)] {
            let v = integrate_half_sphere_weighted(|_| 1.0, n, 1.3, w(a), AngularOrders::default()).unwrap();
            let exact = weighted_half_sphere_measure(n as f64, 1.3, w(a)).unwrap();
            assert!(rel(v, exact) < 1e-12, "n={n} a={a}");
        }
        let v = integrate_half_sphere_weighted(|_| 1.0, 2, 1.0, w(0.0), AngularOrders::default()).unwrap();
        assert!(rel(v, 2.0 * std::f64::consts::PI) < 1e-13);
    }

    #[test]
    fn half_sphere_beta_moment_and_odd_symmetry() {
        let (n, a, r) = (3usize, 0.4, 1.7);
        let rule = HalfSphereRule::new(n, w(a), AngularOrders::default()).unwrap();
        let mass = rule.integrate(r, |_| 1.0).unwrap();
        let m2 = rule.integrate(r, |y| y[0] * y[0] / (r * r)).unwrap();
        assert!(rel(m2 / mass, (1.0 + a) / (n as f64 + 1.0 + a)) < 1e-12);
        let odd = rule.integrate(r, |y| y[1] * (1.0 + y[0] * y[0])).unwrap();
        assert!(odd.abs() < 1e-13 * mass);
        // first moment of y₀ (odd in y₀): Γ-ratio of the Beta law of (y₀/r)²
        let m1 = rule.integrate(r, |y| y[0] / r).unwrap() / mass;
        let (al, be) = ((1.0 + a) / 2.0, n as f64 / 2.0);
        let lg = crate::constants::ln_gamma_unchecked;
        let exact = (lg(al + 0.5) + lg(al + be) - lg(al) - lg(al + be + 0.5)).exp();
        assert!(rel(m1, exact) < 1e-12);
    }

    #[test]
    fn half_ball_volume() {
        for &(n, a) in &[(1usize, 0.0), (2, 0.5), (3, -0.5)] {
            let v = integrate_half_ball_weighted(|_| 1.0, n, 0.8, w(a), 16, AngularOrders::default()).unwrap();
            assert!(rel(v, weighted_half_ball_volume(n as f64, 0.8, w(a)).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn half_ball_y1_squared_brute_force() {
        // N = 2, a = 0: ∫ over the unit half-ball in ℝ³ of y₁² = 2π/15
        let v = integrate_half_ball_weighted(|y| y[1] * y[1], 2, 1.0, w(0.0), 16, AngularOrders::default()).unwrap();
        assert!(rel(v, 2.0 * std::f64::consts::PI / 15.0) < 1e-12);
        // midpoint-rule tensor grid as an independent check
        let k = 160;
        let h = 2.0 / k as f64;
        let mut acc = 0.0;
        for i in 0..k / 2 {
            let y0 = (i as f64 + 0.5) * h;
            for j in 0..k {
                let y1 = -1.0 + (j as f64 + 0.5) * h;
                for l in 0..k {
                    let y2 = -1.0 + (l as f64 + 0.5) * h;
                    if y0 * y0 + y1 * y1 + y2 * y2 < 1.0 {
                        acc += y1 * y1;
                    }
                }
            }
        }
        acc *= h * h * h;
        assert!(rel(v, acc) < 5e-3);
    }

    #[test]
    fn half_ball_homogeneous_scaling() {
        let rule = HalfBallRule::plain(3, w(-0.3), 16, AngularOrders::default()).unwrap();
        let f = |y: &[f64]| y[0] * y[0] * y[1] * y[1] + y[3].powi(4);
        let v1 = rule.integrate(1.0, f).unwrap();
        let v2 = rule.integrate(2.5, f).unwrap();
        assert!(rel(v2 / v1, 2.5f64.powf(3.0 + 1.0 - 0.3 + 4.0)) < 1e-12);
    }

    #[test]
    fn gamma_weighted_ball_values() {
        for &(n, a) in &[(2usize, 0.0), (3, 0.5), (2, -0.5)] {
            let rule = HalfBallRule::gamma_weighted(n, w(a), 12, AngularOrders::default()).unwrap();
            let unit = weighted_half_sphere_measure(n as f64, 1.0, w(a)).unwrap();
            let r = 1.4;
            assert!(rel(rule.integrate(r, |_| 1.0).unwrap(), unit * r * r / 2.0) < 1e-12);
            let q = rule.integrate(r, |y| y.iter().map(|v| v * v).sum()).unwrap();
            assert!(rel(q, unit * r.powi(4) / 4.0) < 1e-12);
            assert!(rule.integrate(r, |y| y[1]).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn full_ball_doubles_even_integrands() {
        let rule = HalfBallRule::plain(2, w(0.5), 12, AngularOrders::default()).unwrap();
        let f = |y: &[f64]| 1.0 + y[0] * y[0] + y[1];
        let half = rule.integrate(1.0, f).unwrap();
        let full = rule.integrate_full(1.0, f).unwrap();
        assert!(rel(full, 2.0 * half) < 1e-13);
        let odd = rule.integrate_full(1.0, |y| y[0]).unwrap();
        assert!(odd.abs() < 1e-14);
    }

    #[test]
    fn halfspace_gaussian_moments() {
        for d in 1..=2 {
            for &a in &[-0.5, 0.0, 0.5] {
                let rule = HalfspaceGaussRule::new(d, w(a), GaussOrders::default()).unwrap();
                for &t in &[0.5, 1.0, 2.0] {
                    assert!((rule.integrate(t, |_| 1.0).unwrap() - 1.0).abs() < 1e-12);
                    assert!(rel(rule.integrate(t, |x| x[1] * x[1]).unwrap(), 2.0 * t) < 1e-12);
                    assert!(rel(rule.integrate(t, |x| x[0] * x[0]).unwrap(), 2.0 * t * (1.0 + a)) < 1e-12);
                    let e4 = rule.integrate(t, |x| x[0].powi(4)).unwrap();
                    assert!(rel(e4, 4.0 * t * t * (1.0 + a) * (3.0 + a)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn halfspace_gaussian_permutation_invariant() {
        let rule = HalfspaceGaussRule::new(2, w(0.3), GaussOrders { freud: 16, hermite: 12 }).unwrap();
        let f1 = rule.integrate(1.3, |x| x[1].powi(4) * x[2] * x[2] * x[0]).unwrap();
        let f2 = rule.integrate(1.3, |x| x[2].powi(4) * x[1] * x[1] * x[0]).unwrap();
        assert!(rel(f1, f2) < 1e-13);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let rule = HalfspaceGaussRule::new(1, w(0.0), GaussOrders { freud: 4, hermite: 4 }).unwrap();
        let err = rule.integrate(1.0, |x| 1.0 / (x[1] - x[1])).unwrap_err();
        assert!(matches!(err, Error::Quadrature(_)));
    }

    #[test]
    fn doubling_orders_is_stable() {
        let f = |x: &[f64]| (x[1]).cos() * (1.0 + x[0] * x[0]).ln();
        let lo = integrate_halfspace_gaussian(f, 1.0, 1, w(0.2), GaussOrders { freud: 16, hermite: 16 }).unwrap();
        let hi = integrate_halfspace_gaussian(f, 1.0, 1, w(0.2), GaussOrders { freud: 32, hermite: 32 }).unwrap();
        assert!((lo - hi).abs() < 1e-8);
    }
}
