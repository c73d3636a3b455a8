//! Samplers for the weighted half-sphere measures `η^{N,a}_r`, `μⁿₜ` and the
//! global `μⁿ`, the pushforward density `νⁿₜ`, and Monte-Carlo checks of the
//! fixed-t and variable-t bridge identities.
//!
//! Randomness comes from ChaCha8 streams keyed by `(seed, batch index)`;
//! batches run in parallel and their statistics are merged in batch order, so
//! every estimate is independent of the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{gamma_a, log_bridge_constant, log_sphere_area, mixing_m, DimensionSpec, WeightParam};
use crate::error::{domain, Error, Result};
use crate::kernels::CompactGaussian;
use crate::lift::map_fn_coords;
use crate::quad::{gauss_jacobi, AngularOrders, HalfBallRule};

/// Samples per RNG stream.
pub const BATCH: usize = 8192;

fn stream(seed: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    rng
}

/// Draws from the normalised `η^{N,a}_r`: `y₀ = r√u` with
/// `u ~ Beta((1+a)/2, N/2)` and `y` uniform on the sphere of radius
/// `√(r² - y₀²)`.
#[derive(Clone, Debug)]
pub struct HalfSphereSampler {
    big_n: usize,
    g1: Gamma<f64>,
    g2: Gamma<f64>,
}

impl HalfSphereSampler {
    pub fn new(big_n: usize, a: WeightParam) -> Result<Self> {
        if big_n < 1 {
            return domain("half-sphere sampler needs N >= 1");
        }
        let g1 = Gamma::new((1.0 + a.get()) / 2.0, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
        let g2 = Gamma::new(big_n as f64 / 2.0, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
        Ok(HalfSphereSampler { big_n, g1, g2 })
    }

    /// Writes one point of radius `r` into `out` (length `N+1`).
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, r: f64, out: &mut [f64]) {
        let (x, y) = (self.g1.sample(rng), self.g2.sample(rng));
        let u = if x + y > 0.0 { x / (x + y) } else { 0.0 };
        let y0 = r * u.sqrt();
        out[0] = y0;
        let mut nrm2 = 0.0;
        for v in out[1..=self.big_n].iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *v = z;
            nrm2 += z * z;
        }
        // (r² - y₀²) = r²(1-u) computed from the Gamma pair avoids cancellation
        let rest = if x + y > 0.0 { r * (y / (x + y)).sqrt() } else { r };
        let s = rest / nrm2.sqrt();
        for v in out[1..=self.big_n].iter_mut() {
            *v *= s;
        }
    }
}

/// Points stored row-major with stride `dim`.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub dim: usize,
    pub points: Vec<f64>,
    /// Time label per point for space-time samplers.
    pub times: Option<Vec<f64>>,
    pub seed: u64,
    pub count: usize,
}

impl SampleBatch {
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

fn generate(
    dim: usize,
    count: usize,
    seed: u64,
    draw: impl Fn(&mut ChaCha8Rng, &mut [f64]) -> f64 + Sync,
) -> (Vec<f64>, Vec<f64>) {
    let nb = count.div_ceil(BATCH);
    let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..nb)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, b);
            let len = BATCH.min(count - b * BATCH);
            let mut pts = vec![0.0; len * dim];
            let mut tags = Vec::with_capacity(len);
            for i in 0..len {
                tags.push(draw(&mut rng, &mut pts[i * dim..(i + 1) * dim]));
            }
            (pts, tags)
        })
        .collect();
    let mut points = Vec::with_capacity(count * dim);
    let mut tags = Vec::with_capacity(count);
    for (p, t) in parts {
        points.extend(p);
        tags.extend(t);
    }
    (points, tags)
}

pub fn sample_weighted_half_sphere(
    big_n: usize,
    r: f64,
    a: WeightParam,
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if !(r > 0.0) {
        return domain(format!("radius must be positive, got {r}"));
    }
    let s = HalfSphereSampler::new(big_n, a)?;
    let (points, _) = generate(big_n + 1, count, seed, |rng, out| {
        s.draw(rng, r, out);
        r
    });
    Ok(SampleBatch { dim: big_n + 1, points, times: None, seed, count })
}

/// `μⁿₜ`: the normalised weighted measure on `ℍ^{dn}_{√(Mt)}`.
pub fn sample_mu_n_t(dims: DimensionSpec, a: WeightParam, t: f64, count: usize, seed: u64) -> Result<SampleBatch> {
    if !(t > 0.0) {
        return domain(format!("time must be positive, got {t}"));
    }
    let mut b = sample_weighted_half_sphere(dims.lifted(), (mixing_m(dims, a) * t).sqrt(), a, count, seed)?;
    b.times = Some(vec![t; count]);
    Ok(b)
}

/// `μⁿ` on `𝔻_{√(MT)}` as a probability: `t ~ U(0,T)`, then `Y ~ μⁿₜ`.
/// The measure itself has mass `T`.
pub fn sample_mu_global(
    dims: DimensionSpec,
    a: WeightParam,
    big_t: f64,
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if !(big_t > 0.0) {
        return domain(format!("horizon must be positive, got {big_t}"));
    }
    let s = HalfSphereSampler::new(dims.lifted(), a)?;
    let m = mixing_m(dims, a);
    let (points, times) = generate(dims.lifted() + 1, count, seed, |rng, out| {
        let t = big_t * rng.random::<f64>();
        s.draw(rng, (m * t).sqrt(), out);
        t
    });
    Ok(SampleBatch { dim: dims.lifted() + 1, points, times: Some(times), seed, count })
}

/// Density of `νⁿₜ = (fₙ)_# μⁿₜ`, i.e. `x₀ᵃ 𝒢ₙ(X,t)`.
pub fn density_nu(x: &[f64], t: f64, dims: DimensionSpec, a: WeightParam) -> Result<f64> {
    let gn = CompactGaussian::new(dims, a)?;
    let g = gn.eval(x, t)?;
    Ok(if g == 0.0 { 0.0 } else { x[0].powf(a.get()) * g })
}

/// Quadrature for `∫ φ(X) x₀ᵃ 𝒢ₙ(X,t) dX` over the support ball.
#[derive(Clone, Debug)]
pub struct CompactGaussianRule {
    gn: CompactGaussian,
    ball: HalfBallRule,
}

impl CompactGaussianRule {
    pub fn new(dims: DimensionSpec, a: WeightParam, radial_order: usize, orders: AngularOrders) -> Result<Self> {
        let gn = CompactGaussian::new(dims, a)?;
        let ball = HalfBallRule::new(dims.d, a, radial_order, orders, 0.0, dims.gn_exponent())?;
        Ok(CompactGaussianRule { gn, ball })
    }

    pub fn integrate(&self, t: f64, phi: impl Fn(&[f64]) -> f64 + Sync) -> Result<f64> {
        let r = self.gn.support2(t).sqrt();
        let at0 = self.gn.eval(&vec![0.0; self.gn.dims.d + 1], t)?;
        Ok(at0 * self.ball.integrate(r, phi)?)
    }
}

/// Monte-Carlo estimate and quadrature reference for one bridge identity.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BridgeResult {
    pub mc_lhs: f64,
    pub quad_rhs: f64,
    pub stderr: f64,
}

impl BridgeResult {
    /// `|lhs - rhs|` in units of the standard error (`0` when both vanish).
    pub fn z_score(&self) -> f64 {
        let diff = (self.mc_lhs - self.quad_rhs).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.stderr
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct BridgeOptions {
    pub count: usize,
    pub seed: u64,
    pub radial_order: usize,
    pub angular: AngularOrders,
    pub time_order: usize,
}

impl Default for BridgeOptions {
    fn default() -> Self {
        BridgeOptions { count: 1_000_000, seed: 1, radial_order: 24, angular: AngularOrders::default(), time_order: 16 }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let d = v - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments { n, mean: self.mean + d * o.n / n, m2: self.m2 + o.m2 + d * d * self.n * o.n / n }
    }

    fn stderr(&self) -> f64 {
        if self.n < 2.0 {
            return f64::INFINITY;
        }
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

fn mc_moments(
    dim: usize,
    count: usize,
    seed: u64,
    draw: impl Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<f64> + Sync,
) -> Result<Moments> {
    let nb = count.div_ceil(BATCH);
    let parts: Vec<Result<Moments>> = (0..nb)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, b);
            let mut buf = vec![0.0; dim];
            let mut m = Moments::default();
            for _ in 0..BATCH.min(count - b * BATCH) {
                m.push(draw(&mut rng, &mut buf)?);
            }
            Ok(m)
        })
        .collect();
    let mut acc = Moments::default();
    for p in parts {
        acc = acc.merge(p?);
    }
    Ok(acc)
}

fn finite(v: f64, at: &[f64]) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("test function is not finite at {at:?}")))
    }
}

/// Fixed-t bridge: `∫_{ℍ^{dn}_{√(Mt)}} φ(fₙ(Y)) y₀ᵃ dη` by sampling `μⁿₜ`,
/// against `C̄ t^{(dn+a)/2} ∫ φ x₀ᵃ 𝒢ₙ(X,t) dX` by quadrature.
pub fn verify_fixed_t_bridge(
    phi: impl Fn(&[f64]) -> f64 + Sync,
    dims: DimensionSpec,
    a: WeightParam,
    t: f64,
    opts: BridgeOptions,
) -> Result<BridgeResult> {
    if !(t > 0.0) {
        return domain(format!("time must be positive, got {t}"));
    }
    let scale = (log_bridge_constant(dims, a)? + (dims.lifted() as f64 + a.get()) / 2.0 * t.ln()).exp();
    let r = (mixing_m(dims, a) * t).sqrt();
    let sampler = HalfSphereSampler::new(dims.lifted(), a)?;
    let d = dims.d;
    let mom = mc_moments(dims.lifted() + 1, opts.count, opts.seed, |rng, y| {
        sampler.draw(rng, r, y);
        let mut x = [0.0f64; 8];
        map_fn_coords(y, dims, &mut x[..d + 1]);
        finite(phi(&x[..d + 1]), &x[..d + 1])
    })?;
    let rule = CompactGaussianRule::new(dims, a, opts.radial_order, opts.angular)?;
    let quad = rule.integrate(t, &phi)?;
    Ok(BridgeResult { mc_lhs: scale * mom.mean, quad_rhs: scale * quad, stderr: scale * mom.stderr() })
}

/// Variable-t bridge: `∫_{𝔻_{√(MT)}} φ(Fₙ(Y)) y₀ᵃ dY` by sampling `μⁿ`
/// (weight `T (Mω_{dn+a}/4γ_a) (Mt)^{(dn-1+a)/2}` per sample), against
/// `(C̄√M/2) ∫₀ᵀ ∫ φ t^{(dn-1+a)/2} x₀ᵃ 𝒢ₙ dX dt` by quadrature.
pub fn verify_variable_t_bridge(
    phi: impl Fn(&[f64], f64) -> f64 + Sync,
    dims: DimensionSpec,
    a: WeightParam,
    big_t: f64,
    opts: BridgeOptions,
) -> Result<BridgeResult> {
    if !(big_t > 0.0) {
        return domain(format!("horizon must be positive, got {big_t}"));
    }
    let av = a.get();
    let nn = dims.lifted() as f64;
    let m = mixing_m(dims, a);
    let half = (nn - 1.0 + av) / 2.0;
    let ln_w = big_t.ln() + m.ln() + log_sphere_area(nn + av)? - (4.0 * gamma_a(a)).ln();
    let sampler = HalfSphereSampler::new(dims.lifted(), a)?;
    let d = dims.d;
    let mom = mc_moments(dims.lifted() + 1, opts.count, opts.seed, |rng, y| {
        let t = big_t * rng.random::<f64>();
        sampler.draw(rng, (m * t).sqrt(), y);
        let mut x = [0.0f64; 8];
        map_fn_coords(y, dims, &mut x[..d + 1]);
        let v = finite(phi(&x[..d + 1], t), &x[..d + 1])?;
        Ok(v * (ln_w + half * (m * t).ln()).exp())
    })?;
    // t = T s, weight s^{half} absorbed by Gauss–Jacobi
    let tr = gauss_jacobi(opts.time_order, 0.0, half)?;
    let rule = CompactGaussianRule::new(dims, a, opts.radial_order, opts.angular)?;
    let mut acc = 0.0;
    for (&s, &ws) in tr.nodes.iter().zip(&tr.weights) {
        let t = big_t * s;
        acc += ws * rule.integrate(t, |x| phi(x, t))?;
    }
    let pref = (log_bridge_constant(dims, a)? + 0.5 * m.ln() - 2f64.ln() + (half + 1.0) * big_t.ln()).exp();
    Ok(BridgeResult { mc_lhs: mom.mean, quad_rhs: pref * acc, stderr: mom.stderr() })
}

/// Kolmogorov–Smirnov statistic `D` of samples against `U(0, T)`.
pub fn ks_uniform(samples: &[f64], big_t: f64) -> f64 {
    let mut u: Vec<f64> = samples.iter().map(|t| t / big_t).collect();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter().enumerate().map(|(i, &v)| ((i as f64 + 1.0) / n - v).max(v - i as f64 / n)).fold(0.0, f64::max)
}

/// 1% critical value of `D·√n`.
pub const KS_CRITICAL_1PCT: f64 = 1.63;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{bridge_constant, weighted_half_ball_volume};

    fn w(a: f64) -> WeightParam {
        WeightParam::new(a).unwrap()
    }

    fn dims(d: usize, n: usize) -> DimensionSpec {
        DimensionSpec::new(d, n).unwrap()
    }

    #[test]
    fn samples_on_sphere_and_reproducible() {
        let b = sample_weighted_half_sphere(5, 1.7, w(-0.9), 20_000, 3).unwrap();
        for i in 0..b.count {
            let p = b.point(i);
            let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((r / 1.7 - 1.0).abs() < 1e-12);
            assert!(p[0] >= 0.0);
        }
        let b2 = sample_weighted_half_sphere(5, 1.7, w(-0.9), 20_000, 3).unwrap();
        assert_eq!(b.points, b2.points);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b3 = pool.install(|| sample_weighted_half_sphere(5, 1.7, w(-0.9), 20_000, 3).unwrap());
        assert_eq!(b.points, b3.points);
    }

    #[test]
    fn beta_moments() {
        // (y₀/r)² ~ Beta(α, β): first three moments within 4 standard errors
        for &(n, av) in &[(2usize, 0.0), (4, -0.8), (3, 0.7)] {
            let b = sample_weighted_half_sphere(n, 2.0, w(av), 200_000, 17).unwrap();
            let (al, be) = ((1.0 + av) / 2.0, n as f64 / 2.0);
            let mut exact = 1.0;
            for k in 1..=3 {
                exact *= (al + k as f64 - 1.0) / (al + be + k as f64 - 1.0);
                let vals: Vec<f64> = (0..b.count).map(|i| (b.point(i)[0] / 2.0).powi(2 * k)).collect();
                let mean = vals.iter().sum::<f64>() / b.count as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b.count as f64 - 1.0);
                let se = (var / b.count as f64).sqrt();
                assert!((mean - exact).abs() < 4.0 * se, "n={n} a={av} k={k}");
            }
            for j in 1..=n {
                let vals: Vec<f64> = (0..b.count).map(|i| b.point(i)[j]).collect();
                let mean = vals.iter().sum::<f64>() / b.count as f64;
                let sd = (vals.iter().map(|v| v * v).sum::<f64>() / b.count as f64).sqrt();
                assert!(mean.abs() < 4.0 * sd / (b.count as f64).sqrt());
            }
        }
    }

    #[test]
    fn a0_matches_plain_hemisphere_sampler() {
        // plain sampler: normalised Gaussian vector with |y₀|
        let n = 3;
        let b = sample_weighted_half_sphere(n, 1.0, w(0.0), 100_000, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut plain = Vec::new();
        for _ in 0..100_000 {
            let v: Vec<f64> = (0..=n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            plain.push(v[0].abs() / r);
        }
        let mut ours: Vec<f64> = (0..b.count).map(|i| b.point(i)[0]).collect();
        ours.sort_by(f64::total_cmp);
        plain.sort_by(f64::total_cmp);
        // two-sample KS at the 1% level
        let (mut i, mut j, mut dmax) = (0usize, 0usize, 0f64);
        let (n1, n2) = (ours.len() as f64, plain.len() as f64);
        while i < ours.len() && j < plain.len() {
            if ours[i] <= plain[j] {
                i += 1;
            } else {
                j += 1;
            }
            dmax = dmax.max((i as f64 / n1 - j as f64 / n2).abs());
        }
        assert!(dmax < 1.63 * ((n1 + n2) / (n1 * n2)).sqrt());
    }

    #[test]
    fn mu_n_t_radius_and_time() {
        let ds = dims(1, 4);
        let a = w(0.5);
        let b = sample_mu_n_t(ds, a, 0.6, 1000, 1).unwrap();
        let m = mixing_m(ds, a);
        for i in 0..b.count {
            let r2: f64 = b.point(i).iter().map(|v| v * v).sum();
            assert!((r2 / m / 0.6 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn global_time_marginal_uniform() {
        let ds = dims(1, 3);
        let a = w(-0.5);
        let b = sample_mu_global(ds, a, 2.0, 100_000, 4).unwrap();
        let m = mixing_m(ds, a);
        let ts: Vec<f64> = (0..b.count).map(|i| b.point(i).iter().map(|v| v * v).sum::<f64>() / m).collect();
        assert!(ts.iter().all(|&t| t < 2.0));
        assert!(ks_uniform(&ts, 2.0) * (ts.len() as f64).sqrt() < KS_CRITICAL_1PCT);
    }

    #[test]
    fn global_density_histogram() {
        // a = 0, dn = 2: density ∝ |Y|^{-1} on the half-disc... of ℝ³; check the
        // radial law: P(|Y| < ρ) = ρ²/R² and P(y₀/|Y| < c) = c
        let ds = dims(1, 2);
        let a = w(0.0);
        let big_t = 1.0;
        let b = sample_mu_global(ds, a, big_t, 200_000, 8).unwrap();
        let big_r2 = mixing_m(ds, a) * big_t;
        let bins = 10;
        let mut hr = vec![0.0; bins];
        let mut hc = vec![0.0; bins];
        for i in 0..b.count {
            let p = b.point(i);
            let r2: f64 = p.iter().map(|v| v * v).sum();
            hr[((r2 / big_r2) * bins as f64).min(bins as f64 - 1.0) as usize] += 1.0;
            hc[((p[0] / r2.sqrt()) * bins as f64).min(bins as f64 - 1.0) as usize] += 1.0;
        }
        let e = b.count as f64 / bins as f64;
        let chi_r: f64 = hr.iter().map(|o| (o - e).powi(2) / e).sum();
        let chi_c: f64 = hc.iter().map(|o| (o - e).powi(2) / e).sum();
        // χ²₉ at 1%: 21.67
        assert!(chi_r < 21.67 && chi_c < 21.67, "{chi_r} {chi_c}");
    }

    #[test]
    fn density_nu_unit_mass_and_symmetry() {
        let ds = dims(1, 8);
        let a = w(0.5);
        let rule = CompactGaussianRule::new(ds, a, 24, AngularOrders::default()).unwrap();
        assert!((rule.integrate(1.0, |_| 1.0).unwrap() - 1.0).abs() < 1e-12);
        let x = [0.4, 0.9];
        let g = CompactGaussian::new(ds, a).unwrap().eval(&x, 1.0).unwrap();
        assert!((density_nu(&x, 1.0, ds, a).unwrap() - 0.4f64.powf(0.5) * g).abs() < 1e-15);
        assert_eq!(density_nu(&[0.4, 0.9], 1.0, ds, a).unwrap(), density_nu(&[0.4, -0.9], 1.0, ds, a).unwrap());
    }

    #[test]
    fn fixed_t_bridge_small() {
        let ds = dims(1, 4);
        let a = w(0.0);
        let opts = BridgeOptions { count: 100_000, ..Default::default() };
        let one = verify_fixed_t_bridge(|_| 1.0, ds, a, 1.0, opts).unwrap();
        let cbar = bridge_constant(ds, a).unwrap();
        assert!((one.mc_lhs / cbar - 1.0).abs() < 1e-12);
        assert!((one.quad_rhs / cbar - 1.0).abs() < 1e-10);
        let x1 = verify_fixed_t_bridge(|x| x[1] * x[1], ds, a, 1.0, opts).unwrap();
        assert!(x1.z_score() < 3.0, "{x1:?}");
    }

    #[test]
    fn variable_t_bridge_small() {
        let ds = dims(1, 2);
        let a = w(0.5);
        let opts = BridgeOptions { count: 100_000, ..Default::default() };
        let one = verify_variable_t_bridge(|_, _| 1.0, ds, a, 1.5, opts).unwrap();
        let vol = weighted_half_ball_volume(2.0, (mixing_m(ds, a) * 1.5).sqrt(), a).unwrap();
        assert!((one.quad_rhs / vol - 1.0).abs() < 1e-10);
        assert!(one.z_score() < 3.0, "{one:?}");
        let tt = verify_variable_t_bridge(|_, t| t, ds, a, 1.5, opts).unwrap();
        assert!(tt.z_score() < 3.0, "{tt:?}");
    }
}
