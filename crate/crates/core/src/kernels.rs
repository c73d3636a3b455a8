//! The weighted Gaussian 𝒢, its compactly supported approximations 𝒢ₙ,
//! the elliptic and parabolic Poisson kernels, and the weighted normal
//! derivative `∂ᵥᵃ`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants::{
    ln_gamma_unchecked, log_gaussian_constants, log_gaussian_limit_constant, mixing_m, DimensionSpec, WeightParam,
};
use crate::error::{domain, Error, Result};

/// A point `(X, t) = ((x₀, x), t)` of the weighted half-space times time.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimePoint {
    pub x0: f64,
    pub x: Vec<f64>,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x0: f64, x: Vec<f64>, t: f64) -> Result<Self> {
        if !(x0 >= 0.0) {
            return domain(format!("x0 must be nonnegative, got {x0}"));
        }
        Ok(SpaceTimePoint { x0, x, t })
    }

    /// `X = (x₀, x)` as one vector.
    pub fn spatial(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.x.len() + 1);
        v.push(self.x0);
        v.extend_from_slice(&self.x);
        v
    }

    pub fn norm2(&self) -> f64 {
        self.x0 * self.x0 + self.x.iter().map(|v| v * v).sum::<f64>()
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("time must be positive, got {t}"));
    }
    Ok(())
}

/// 𝒢 with its normalising constant precomputed.
#[derive(Clone, Copy, Debug)]
pub struct WeightedGaussian {
    pub d: usize,
    pub a: WeightParam,
    ln_c: f64,
}

impl WeightedGaussian {
    pub fn new(d: usize, a: WeightParam) -> Self {
        WeightedGaussian { d, a, ln_c: log_gaussian_limit_constant(d, a) }
    }

    /// `𝒢(X,t)` for `X = (x₀, x) ∈ ℝ^{d+1}`.
    pub fn eval(&self, x: &[f64], t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.eval_unchecked(x, t))
    }

    #[inline]
    pub fn eval_unchecked(&self, x: &[f64], t: f64) -> f64 {
        let k = (self.d as f64 + 1.0 + self.a.get()) / 2.0;
        (self.ln_c - k * t.ln() - norm2(x) / (4.0 * t)).exp()
    }
}

/// 𝒢ₙ with its constants precomputed.
#[derive(Clone, Copy, Debug)]
pub struct CompactGaussian {
    pub dims: DimensionSpec,
    pub a: WeightParam,
    ln_cn: f64,
    mn: f64,
    expo: f64,
}

impl CompactGaussian {
    pub fn new(dims: DimensionSpec, a: WeightParam) -> Result<Self> {
        let (ln_cn, _) = log_gaussian_constants(dims, a)?;
        Ok(CompactGaussian { dims, a, ln_cn, mn: mixing_m(dims, a) * dims.n as f64, expo: dims.gn_exponent() })
    }

    /// Squared support radius `Mnt`.
    pub fn support2(&self, t: f64) -> f64 {
        self.mn * t
    }

    pub fn eval(&self, x: &[f64], t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.eval_unchecked(x, t))
    }

    #[inline]
    pub fn eval_unchecked(&self, x: &[f64], t: f64) -> f64 {
        let z = norm2(x) / (self.mn * t);
        if z >= 1.0 {
            return 0.0;
        }
        let k = (self.dims.d as f64 + 1.0 + self.a.get()) / 2.0;
        (self.ln_cn - k * t.ln() + self.expo * (-z).ln_1p()).exp()
    }

    /// `ln(𝒢ₙ/𝒢)` as a function of `z = |X|²/t` (inside the support).
    pub fn log_ratio(&self, z: f64) -> f64 {
        let ln_c = log_gaussian_limit_constant(self.dims.d, self.a);
        self.ln_cn - ln_c + self.expo * (-z / self.mn).ln_1p() + z / 4.0
    }

    /// Maximiser of `𝒢ₙ/𝒢` in `z = |X|²/t`, when it lies in the support.
    pub fn ratio_argmax(&self) -> f64 {
        (self.mn - 4.0 * self.expo).clamp(0.0, self.mn)
    }
}

/// `𝒢(X,t) = 𝒞 t^{-(d+1+a)/2} e^{-|X|²/4t}`.
pub fn eval_g(p: &SpaceTimePoint, d: usize, a: WeightParam) -> Result<f64> {
    WeightedGaussian::new(d, a).eval(&p.spatial(), p.t)
}

/// `𝒢ₙ(X,t)`, zero outside `|X|² < Mnt`.
pub fn eval_gn(p: &SpaceTimePoint, dims: DimensionSpec, a: WeightParam) -> Result<f64> {
    CompactGaussian::new(dims, a)?.eval(&p.spatial(), p.t)
}

/// Grid for [`sup_gap_gn`]: times geometric in `[t_min, t_max]`, radii
/// covering the whole support with spacing refined toward the origin.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GapGrid {
    pub t_max: f64,
    pub t_count: usize,
    pub r_count: usize,
}

impl Default for GapGrid {
    fn default() -> Self {
        GapGrid { t_max: 4.0, t_count: 9, r_count: 4001 }
    }
}

/// `max |𝒢ₙ - 𝒢|` over the grid. Both kernels are radial in `X`, so the
/// grid runs over `(|X|, t)`.
pub fn sup_gap_gn(dims: DimensionSpec, a: WeightParam, t_min: f64, grid: GapGrid) -> Result<f64> {
    check_time(t_min)?;
    if grid.t_count == 0 || grid.r_count == 0 || !(grid.t_max >= t_min) {
        return Err(Error::Domain("empty evaluation grid".into()));
    }
    let g = WeightedGaussian::new(dims.d, a);
    let gn = CompactGaussian::new(dims, a)?;
    let mut x = vec![0.0; dims.d + 1];
    let mut best: f64 = 0.0;
    for it in 0..grid.t_count {
        let t = if grid.t_count == 1 {
            t_min
        } else {
            t_min * (grid.t_max / t_min).powf(it as f64 / (grid.t_count - 1) as f64)
        };
        let rmax = gn.support2(t).sqrt();
        for ir in 0..grid.r_count {
            let s = ir as f64 / (grid.r_count.max(2) - 1) as f64;
            x[0] = rmax * s * s;
            best = best.max((gn.eval_unchecked(&x, t) - g.eval_unchecked(&x, t)).abs());
        }
    }
    Ok(best)
}

/// Empirical `max 𝒢ₙ/𝒢` over random points of the support. The ratio depends
/// on `(X,t)` only through `|X|²/t`, so points are drawn at `t = 1` with
/// radius uniform on `[0, √(Mn)]`.
pub fn ratio_bound_estimate(dims: DimensionSpec, a: WeightParam, count: usize, seed: u64) -> Result<f64> {
    let gn = CompactGaussian::new(dims, a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rmax = gn.support2(1.0).sqrt();
    let mut best = gn.log_ratio(0.0);
    for _ in 0..count {
        let r: f64 = rng.random::<f64>() * rmax;
        let z = r * r;
        if z < gn.mn {
            best = best.max(gn.log_ratio(z));
        }
    }
    Ok(best.exp())
}

/// Exact `sup 𝒢ₙ/𝒢`, attained at `|X|²/t = 2d + 6 + 2a`.
pub fn ratio_bound_exact(dims: DimensionSpec, a: WeightParam) -> Result<f64> {
    let gn = CompactGaussian::new(dims, a)?;
    Ok(gn.log_ratio(gn.ratio_argmax()).exp())
}

/// Parabolic Poisson kernel
/// `π^{-d/2} 2^{-(d+1-a)} / Γ((1-a)/2) · x₀^{1-a} t^{-(d+3-a)/2} e^{-|X|²/4t}`.
pub fn eval_parabolic_poisson(p: &SpaceTimePoint, d: usize, a: WeightParam) -> Result<f64> {
    check_time(p.t)?;
    Ok(parabolic_poisson_unchecked(p.x0, p.norm2(), p.t, d, a))
}

pub(crate) fn parabolic_poisson_unchecked(x0: f64, r2: f64, t: f64, d: usize, a: WeightParam) -> f64 {
    if x0 == 0.0 {
        return 0.0;
    }
    let (df, av) = (d as f64, a.get());
    let ln = -df / 2.0 * PI.ln() - (df + 1.0 - av) * 2f64.ln() - ln_gamma_unchecked((1.0 - av) / 2.0)
        + (1.0 - av) * x0.ln()
        - (df + 3.0 - av) / 2.0 * t.ln()
        - r2 / (4.0 * t);
    ln.exp()
}

/// Normalising constant of the elliptic Poisson kernel,
/// `Γ((N+1-a)/2) / (π^{N/2} Γ((1-a)/2))`.
pub fn elliptic_poisson_constant(big_n: usize, a: WeightParam) -> f64 {
    let (nf, av) = (big_n as f64, a.get());
    (ln_gamma_unchecked((nf + 1.0 - av) / 2.0) - nf / 2.0 * PI.ln() - ln_gamma_unchecked((1.0 - av) / 2.0)).exp()
}

/// Elliptic Poisson kernel `C y₀^{1-a} |Y|^{-(N+1-a)}` at `Y = (y₀, y)`.
pub fn eval_elliptic_poisson(y: &[f64], big_n: usize, a: WeightParam) -> Result<f64> {
    if y.len() != big_n + 1 {
        return domain(format!("point has {} coordinates, expected {}", y.len(), big_n + 1));
    }
    let r2 = norm2(y);
    if !(r2 > 0.0) {
        return domain("elliptic Poisson kernel is singular at the origin");
    }
    if !(y[0] >= 0.0) {
        return domain("y0 must be nonnegative");
    }
    let av = a.get();
    Ok(elliptic_poisson_constant(big_n, a) * y[0].powf(1.0 - av) * r2.powf(-(big_n as f64 + 1.0 - av) / 2.0))
}

/// Options for [`weighted_flux_limit`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxOptions {
    /// Largest `y₀` sampled.
    pub h0: f64,
    /// Richardson levels; `levels + 1` base samples at `h0/2ᵏ`.
    pub levels: usize,
    /// Relative agreement required between the last two diagonal estimates.
    pub tol: f64,
}

impl Default for FluxOptions {
    fn default() -> Self {
        FluxOptions { h0: 0.1, levels: 4, tol: 1e-6 }
    }
}

/// `lim_{s→0⁺} f(s)` from samples at `s = h0/2ᵏ`, assuming
/// `f(s) = f(0) + Σ cⱼ s^{pⱼ}` with the given increasing exponents. Exponents
/// are reused shifted by 4 when there are more levels than exponents.
pub fn richardson_limit(f: impl Fn(f64) -> f64, exps: &[f64], opts: FluxOptions) -> Result<f64> {
    if !(opts.h0 > 0.0) || opts.levels == 0 || exps.is_empty() {
        return domain("extrapolation needs h0 > 0, one level and one exponent");
    }
    let mut table: Vec<f64> = (0..=opts.levels).map(|k| f(opts.h0 / 2f64.powi(k as i32))).collect();
    if table.iter().any(|q| !q.is_finite()) {
        return Err(Error::Convergence("non-finite samples near y0 = 0".into()));
    }
    let mut diag = vec![table[table.len() - 1]];
    for j in 0..opts.levels {
        let p = exps[j % exps.len()] + 4.0 * (j / exps.len()) as f64;
        let fac = 2f64.powf(p);
        table = table.windows(2).map(|w| (fac * w[1] - w[0]) / (fac - 1.0)).collect();
        diag.push(table[table.len() - 1]);
    }
    let last = diag[diag.len() - 1];
    let prev = diag[diag.len() - 2];
    let scale = last.abs().max(prev.abs()).max(1.0);
    if (last - prev).abs() > opts.tol * scale {
        return Err(Error::Convergence(format!(
            "extrapolated estimates diverge: {prev:e} then {last:e} (tolerance {:e})",
            opts.tol
        )));
    }
    Ok(last)
}

/// Error exponents of a field `c₀ + c₁s^{1-a} + c₂s² + c₃s^{3-a} + …` near
/// the thin set, as seen by [`weighted_flux_limit`]'s difference quotient.
fn flux_exponents(a: f64) -> [f64; 4] {
    [1.0 + a, 2.0, 3.0 + a, 4.0]
}

/// Exponents of the same expansion seen directly.
pub fn thin_exponents(a: f64) -> [f64; 4] {
    [1.0 - a, 2.0, 3.0 - a, 4.0]
}

/// `∂ᵥᵃV = lim_{y₀→0⁺} y₀ᵃ ∂_{y₀} V` along a ray in `y₀`.
///
/// Uses the difference quotient `q(s) = (V(s) - V(s/2)) / (s^{1-a}(1 - 2^{a-1}))`,
/// whose limit times `1-a` is the flux, and eliminates the error terms
/// `s^{1+a}, s², s^{3+a}, s⁴` of the local expansion by Richardson steps with
/// ratio 2.
pub fn weighted_flux_limit(v: impl Fn(f64) -> f64, a: WeightParam, opts: FluxOptions) -> Result<f64> {
    let av = a.get();
    let denom = 1.0 - 2f64.powf(av - 1.0);
    let q = |s: f64| (v(s) - v(s / 2.0)) / (s.powf(1.0 - av) * denom);
    Ok((1.0 - av) * richardson_limit(q, &flux_exponents(av), opts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{GaussOrders, HalfspaceGaussRule};

    fn w(a: f64) -> WeightParam {
        WeightParam::new(a).unwrap()
    }

    fn pt(x: &[f64], t: f64) -> SpaceTimePoint {
        SpaceTimePoint::new(x[0], x[1..].to_vec(), t).unwrap()
    }

    #[test]
    fn g_at_origin() {
        let v = eval_g(&pt(&[0.0, 0.0], 1.0), 1, w(0.0)).unwrap();
        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(eval_g(&pt(&[0.0, 0.0], 0.0), 1, w(0.0)).is_err());
    }

    #[test]
    fn g_parabolic_scaling() {
        let a = w(0.3);
        let (x, t, lam) = ([0.4, -1.1, 0.7], 0.8, 1.7);
        let g = WeightedGaussian::new(2, a);
        let xs: Vec<f64> = x.iter().map(|v| lam * v).collect();
        let lhs = g.eval(&xs, lam * lam * t).unwrap();
        let rhs = lam.powf(-(3.0 + 0.3)) * g.eval(&x, t).unwrap();
        assert!((lhs / rhs - 1.0).abs() < 1e-13);
    }

    #[test]
    fn g_normalised() {
        let rule = HalfspaceGaussRule::new(1, w(0.5), GaussOrders::default()).unwrap();
        // f = 1 exercises the constant; f = 𝒢 itself would be circular
        assert!((rule.integrate(2.0, |_| 1.0).unwrap() - 1.0).abs() < 1e-12);
        // independent route: 2D tensor Gauss–Laguerre in u = x₀²/4t and Hermite in x
        let t = 2.0;
        let lag = crate::quad::gauss_laguerre(30, (0.5 - 1.0) / 2.0).unwrap();
        let her = crate::quad::hermite_line(30).unwrap();
        let g = WeightedGaussian::new(1, w(0.5));
        let mut acc = 0.0;
        for (&u, &wu) in lag.nodes.iter().zip(&lag.weights) {
            let x0 = 2.0 * (t * u).sqrt();
            for (&z, &wz) in her.nodes.iter().zip(&her.weights) {
                let x1 = t.sqrt() * z;
                // dx₀ x₀ᵃ = t^{(1+a)/2} 2^a u^{(a-1)/2} du ; dx₁ = √t dz
                let jac = t.powf(0.75) * 2f64.powf(0.5) * t.sqrt();
                let strip = (u + z * z / 4.0).exp();
                acc += wu * wz * jac * strip * g.eval(&[x0, x1], t).unwrap();
            }
        }
        assert!((acc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn g_solves_weighted_heat_equation() {
        // ∂ₜ𝒢 = ∂₀²𝒢 + (a/x₀)∂₀𝒢 + Δₓ𝒢, residual O(h²)
        let a = w(-0.4);
        let g = WeightedGaussian::new(1, a);
        let (x0, x1, t) = (0.7, 0.3, 1.2);
        let res = |h: f64| {
            let f = |p: f64, q: f64, s: f64| g.eval(&[p, q], s).unwrap();
            let dt = (f(x0, x1, t + h) - f(x0, x1, t - h)) / (2.0 * h);
            let d00 = (f(x0 + h, x1, t) - 2.0 * f(x0, x1, t) + f(x0 - h, x1, t)) / (h * h);
            let d0 = (f(x0 + h, x1, t) - f(x0 - h, x1, t)) / (2.0 * h);
            let d11 = (f(x0, x1 + h, t) - 2.0 * f(x0, x1, t) + f(x0, x1 - h, t)) / (h * h);
            (dt - d00 - a.get() / x0 * d0 - d11).abs()
        };
        let (r1, r2) = (res(1e-2), res(5e-3));
        assert!(r1 < 1e-4);
        assert!(r1 / r2 > 3.5 && r1 / r2 < 4.5, "ratio {}", r1 / r2);
    }

    #[test]
    fn gn_basics() {
        let dims = DimensionSpec::new(1, 4).unwrap();
        let a = w(0.0);
        let gn = CompactGaussian::new(dims, a).unwrap();
        let r = gn.support2(1.0).sqrt();
        assert_eq!(gn.eval(&[r, 0.0], 1.0).unwrap(), 0.0);
        assert_eq!(gn.eval(&[r * 0.8, r * 0.7], 1.0).unwrap(), 0.0);
        let (cn, _) = crate::constants::gaussian_constants(dims, a).unwrap();
        assert!((gn.eval(&[0.0, 0.0], 1.0).unwrap() - cn).abs() < 1e-15);
        // continuous at the edge when dn - d - 2 > 0
        let dims = DimensionSpec::new(1, 8).unwrap();
        let gn = CompactGaussian::new(dims, a).unwrap();
        let r = gn.support2(1.0).sqrt();
        assert!(gn.eval(&[r * (1.0 - 1e-9), 0.0], 1.0).unwrap() < 1e-20);
    }

    #[test]
    fn gn_close_to_g_for_large_n() {
        let dims = DimensionSpec::new(1, 256).unwrap();
        let a = w(0.0);
        let gn = eval_gn(&pt(&[1.0, 1.0], 1.0), dims, a).unwrap();
        let g = eval_g(&pt(&[1.0, 1.0], 1.0), 1, a).unwrap();
        assert!((gn / g - 1.0).abs() < 0.02);
    }

    #[test]
    fn gap_decreases_like_one_over_n() {
        for &a in &[-0.5, 0.5] {
            let gaps: Vec<f64> = [64, 128, 256, 512]
                .iter()
                .map(|&n| sup_gap_gn(DimensionSpec::new(1, n).unwrap(), w(a), 0.5, GapGrid::default()).unwrap())
                .collect();
            for p in gaps.windows(2) {
                assert!(p[1] < p[0]);
                let ratio = p[0] / p[1];
                assert!((1.5..=2.5).contains(&ratio), "ratio {ratio}");
            }
            let g0 = WeightedGaussian::new(1, w(a)).eval(&[0.0, 0.0], 0.5).unwrap();
            assert!(gaps[3] < 0.02 * g0);
        }
        assert!(sup_gap_gn(
            DimensionSpec::new(1, 4).unwrap(),
            w(0.0),
            0.5,
            GapGrid { t_count: 0, ..Default::default() }
        )
        .is_err());
    }

    #[test]
    fn ratio_bound_behaviour() {
        let a = w(0.0);
        let gn = CompactGaussian::new(DimensionSpec::new(1, 16).unwrap(), a).unwrap();
        let (cn, c) = crate::constants::gaussian_constants(gn.dims, a).unwrap();
        assert!((gn.log_ratio(0.0).exp() - cn / c).abs() < 1e-14);
        let mut sup: f64 = 0.0;
        for n in [8usize, 16, 32, 64, 128, 256, 512, 1024] {
            let dims = DimensionSpec::new(1, n).unwrap();
            let est = ratio_bound_estimate(dims, a, 20_000, 7).unwrap();
            let est2 = ratio_bound_estimate(dims, a, 40_000, 8).unwrap();
            assert!((est / est2 - 1.0).abs() < 0.05);
            let exact = ratio_bound_exact(dims, a).unwrap();
            assert!(est <= exact * (1.0 + 1e-12));
            sup = sup.max(exact);
        }
        assert!(sup < 2.0);
    }

    #[test]
    fn ratio_argmax_is_stationary() {
        let gn = CompactGaussian::new(DimensionSpec::new(2, 30).unwrap(), w(0.25)).unwrap();
        let z = gn.ratio_argmax();
        assert!((z - (2.0 * 2.0 + 6.0 + 0.5)).abs() < 1e-12);
        let h = 1e-4;
        assert!(gn.log_ratio(z) > gn.log_ratio(z + h) && gn.log_ratio(z) > gn.log_ratio(z - h));
    }

    #[test]
    fn parabolic_poisson_classical() {
        // a = 0: -2 ∂_{x₀} of the heat kernel of ℝ^{d+1}
        for d in 1..=2 {
            for &(x0, x1, t) in &[(0.5, 0.2, 1.0), (1.5, -0.7, 0.3), (0.1, 2.0, 4.0)] {
                let mut p = vec![x0, x1];
                if d == 2 {
                    p.push(0.4);
                }
                let r2: f64 = p.iter().map(|v| v * v).sum();
                let classical = (4.0 * PI * t).powf(-(d as f64 + 1.0) / 2.0) * x0 / t * (-r2 / (4.0 * t)).exp();
                let got = eval_parabolic_poisson(&pt(&p, t), d, w(0.0)).unwrap();
                assert!((got / classical - 1.0).abs() < 1e-13);
            }
        }
        assert_eq!(eval_parabolic_poisson(&pt(&[0.0, 1.0], 1.0), 1, w(0.3)).unwrap(), 0.0);
        assert!(eval_parabolic_poisson(&pt(&[1e-12, 1.0], 1.0), 1, w(0.3)).unwrap() < 1e-6);
    }

    #[test]
    fn parabolic_poisson_unit_mass() {
        // ∫₀^∞ ∫ P(x₀, x', t') dx' dt' = 1 : Hermite in x' = √t z,
        // generalized Laguerre in s = x₀²/4t' absorbing s^{-(1+a)/2}
        for &av in &[0.0, -0.5, 0.6] {
            let a = w(av);
            let x0 = 1.0;
            let al = -(1.0 + av) / 2.0;
            let her = crate::quad::hermite_line(40).unwrap();
            let lag = crate::quad::gauss_laguerre(40, al).unwrap();
            let mut acc = 0.0;
            for (&s, &ws) in lag.nodes.iter().zip(&lag.weights) {
                let t = x0 * x0 / (4.0 * s);
                let jac = x0 * x0 / (4.0 * s * s) * s.exp() * s.powf(-al);
                for (&z, &wz) in her.nodes.iter().zip(&her.weights) {
                    let x = t.sqrt() * z;
                    let p = parabolic_poisson_unchecked(x0, x0 * x0 + x * x, t, 1, a);
                    acc += ws * jac * wz * t.sqrt() * (z * z / 4.0).exp() * p;
                }
            }
            assert!((acc - 1.0).abs() < 1e-12, "mass {acc}");
        }
    }

    #[test]
    fn elliptic_poisson_mass_and_shape() {
        // a = 0, N = 1: y₀ / (π |Y|²)
        let v = eval_elliptic_poisson(&[0.5, 0.3], 1, w(0.0)).unwrap();
        assert!((v - 0.5 / (PI * 0.34)).abs() < 1e-14);
        assert!(eval_elliptic_poisson(&[0.0, 0.0], 1, w(0.0)).is_err());
        // unit mass at fixed y₀ (N = 1): y = y₀ tan θ, u = sin θ turns the
        // integrand into C (1-u²)^{-(1+a)/2}; the half u > 0 is doubled
        for &av in &[0.0, -0.5, 0.5] {
            let rule = crate::quad::gauss_jacobi(40, -(1.0 + av) / 2.0, 0.0).unwrap();
            let y0 = 0.7;
            let mass: f64 = 2.0
                * rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&u, &wu)| {
                        let th = u.asin();
                        let y = y0 * th.tan();
                        let dy_du = y0 / th.cos().powi(3);
                        wu * (1.0 - u).powf((1.0 + av) / 2.0)
                            * dy_du
                            * eval_elliptic_poisson(&[y0, y], 1, w(av)).unwrap()
                    })
                    .sum::<f64>();
            assert!((mass - 1.0).abs() < 1e-12, "a={av} mass={mass}");
        }
        // homogeneity: P(λY) = λ^{-N} P(Y)
        let a = w(0.3);
        let y = [0.4, -0.2, 0.9];
        let lam = 2.3;
        let ys: Vec<f64> = y.iter().map(|v| lam * v).collect();
        let r = eval_elliptic_poisson(&ys, 2, a).unwrap() / eval_elliptic_poisson(&y, 2, a).unwrap();
        assert!((r - lam.powi(-2)).abs() < 1e-13);
    }

    #[test]
    fn flux_limit_cases() {
        for &av in &[-0.6, 0.0, 0.4] {
            let a = w(av);
            let opts = FluxOptions::default();
            // even a-harmonic: y₁² - y₀²/(1+a) at y₁ = 0.3
            let even = weighted_flux_limit(|s| 0.09 - s * s / (1.0 + av), a, opts).unwrap();
            assert!(even.abs() < 1e-12);
            let thin = weighted_flux_limit(|s| s.powf(1.0 - av), a, opts).unwrap();
            assert!((thin - (1.0 - av)).abs() < 1e-12);
            let mixed =
                weighted_flux_limit(|s| 2.0 + 3.0 * s.powf(1.0 - av) + s * s - s.powf(3.0 - av), a, opts).unwrap();
            assert!((mixed - 3.0 * (1.0 - av)).abs() < 1e-9);
        }
        let bad = weighted_flux_limit(|s| (1.0 / s).sin(), w(0.0), FluxOptions { h0: 0.1, levels: 4, tol: 1e-8 });
        assert!(matches!(bad, Err(Error::Convergence(_))));
    }
}
