//! Alt–Caffarelli–Friedman functionals `φ(r)` and `Φ(t)` and the weak
//! subsolution test.

use serde::{Deserialize, Serialize};

use super::almgren::{check_space_dim, height_dirichlet};
use super::trace::{check_grid, FrequencyTrace, TraceParam};
use crate::constants::WeightParam;
use crate::error::{domain, Result};
use crate::field::{ScalarField, SpaceTimeField};
use crate::poly::Poly;
use crate::quad::{chunked_sum, gauss_jacobi, gauss_legendre_on, HalfBallRule, HalfspaceGaussRule};

/// `φ(r) = r^{a-1} Π_i ∫_{𝔻_r} |∇Vᵢ|² |Y|^{-(N-1+a)} y₀ᵃ dY`.
/// `rule` must be a Γ-weighted rule ([`HalfBallRule::gamma_weighted`]).
pub fn elliptic_acf(v1: &impl ScalarField, v2: &impl ScalarField, r: f64, rule: &HalfBallRule) -> Result<f64> {
    let n = rule.big_n();
    let expected = -(n as f64 - 1.0 + rule.sphere.a.get());
    if (rule.p - expected).abs() > 1e-14 || rule.m != 0.0 {
        return domain("elliptic ACF needs the Γ-weighted ball rule");
    }
    if v1.dim() != n + 1 || v2.dim() != n + 1 {
        return domain("field dimension does not match the rule");
    }
    let i1 = rule.integrate(r, |y| v1.grad_norm2(y))?;
    let i2 = rule.integrate(r, |y| v2.grad_norm2(y))?;
    Ok(r.powf(rule.sphere.a.get() - 1.0) * i1 * i2)
}

/// `(±y₁)⁺` on `ℝᴺ⁺¹`.
#[derive(Clone, Copy, Debug)]
pub struct PositivePart {
    pub dim: usize,
    pub sign: f64,
}

impl ScalarField for PositivePart {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, y: &[f64]) -> f64 {
        (self.sign * y[1]).max(0.0)
    }

    fn gradient(&self, y: &[f64], g: &mut [f64]) {
        g.iter_mut().for_each(|v| *v = 0.0);
        if self.sign * y[1] > 0.0 {
            g[1] = self.sign;
        }
    }
}

/// A polynomial in `(X, t)` with no equation attached, for negative
/// controls. Its weighted Laplacian is left to the caller.
#[derive(Clone, Debug)]
pub struct FreePolynomial {
    u: Poly,
    grad: Vec<Poly>,
    dt: Poly,
    dt_grad: Vec<Poly>,
    dtt: Poly,
    lap: Poly,
}

impl FreePolynomial {
    /// `u` in the variables `(x₀, …, x_d, t)`.
    pub fn new(u: Poly, a: WeightParam) -> Result<Self> {
        if u.nvars() < 3 {
            return domain("need at least (x0, x1, t)");
        }
        let ns = u.nvars() - 1;
        let grad = (0..ns).map(|i| u.partial(i)).collect();
        let dt = u.partial(ns);
        let dt_grad = (0..ns).map(|i| dt.partial(i)).collect();
        let dtt = dt.partial(ns);
        let lap = u.weighted_laplacian(a.get(), ns)?;
        Ok(FreePolynomial { u, grad, dt, dt_grad, dtt, lap })
    }

    fn at(&self, x: &[f64], t: f64) -> Vec<f64> {
        let mut z = x.to_vec();
        z.push(t);
        z
    }
}

impl SpaceTimeField for FreePolynomial {
    fn space_dim(&self) -> usize {
        self.grad.len()
    }
    fn value(&self, x: &[f64], t: f64) -> f64 {
        self.u.eval(&self.at(x, t))
    }
    fn gradient(&self, x: &[f64], t: f64, g: &mut [f64]) {
        let z = self.at(x, t);
        for (gi, p) in g.iter_mut().zip(&self.grad) {
            *gi = p.eval(&z);
        }
    }
    fn dt(&self, x: &[f64], t: f64) -> f64 {
        self.dt.eval(&self.at(x, t))
    }
    fn dt_gradient(&self, x: &[f64], t: f64, g: &mut [f64]) {
        let z = self.at(x, t);
        for (gi, p) in g.iter_mut().zip(&self.dt_grad) {
            *gi = p.eval(&z);
        }
    }
    fn dtt(&self, x: &[f64], t: f64) -> f64 {
        self.dtt.eval(&self.at(x, t))
    }
    fn weighted_laplacian(&self, x: &[f64], t: f64) -> f64 {
        self.lap.eval(&self.at(x, t))
    }
}

/// `1 - x₁²`, which fails the subsolution test on bumps near `x₁ = 0`.
pub fn negative_control(d: usize, a: WeightParam) -> Result<FreePolynomial> {
    let nv = d + 2;
    let mut e = vec![0; nv];
    e[1] = 2;
    FreePolynomial::new(Poly::constant(nv, 1.0).sub(&Poly::monomial(e, 1.0)), a)
}

/// `∫₀ᵗ 𝒟(τ;U) dτ` by Gauss–Legendre on `(0,t)`.
fn cumulative_dirichlet(u: &impl SpaceTimeField, t: f64, rule: &HalfspaceGaussRule, order: usize) -> Result<f64> {
    let tr = gauss_legendre_on(order, 0.0, t)?;
    let mut s = 0.0;
    for (tau, w) in tr.nodes.iter().zip(&tr.weights) {
        s += w * height_dirichlet(u, *tau, rule)?.1;
    }
    Ok(s)
}

/// `Φ(t) = t^{-(1-a)/2} Π_i ∫₀ᵗ 𝒟(τ;Uᵢ) dτ` on a time grid.
pub fn parabolic_acf_trace(
    u1: &impl SpaceTimeField,
    u2: &impl SpaceTimeField,
    times: &[f64],
    rule: &HalfspaceGaussRule,
    time_order: usize,
) -> Result<FrequencyTrace> {
    check_grid(times)?;
    check_space_dim(u1, rule)?;
    check_space_dim(u2, rule)?;
    let a = rule.a.get();
    let values = times
        .iter()
        .map(|&t| {
            let i1 = cumulative_dirichlet(u1, t, rule, time_order)?;
            let i2 = cumulative_dirichlet(u2, t, rule, time_order)?;
            Ok(t.powf(-(1.0 - a) / 2.0) * i1 * i2)
        })
        .collect::<Result<Vec<_>>>()?;
    FrequencyTrace::new(TraceParam::T, times.to_vec(), values)
}

/// `Υ(X,t) = β((t-t_c)/t_w) Π_k β((x_k-c_k)/w_k)` with `β(s) = (1-s²)⁴₊`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeBump {
    pub center: Vec<f64>,
    pub half_widths: Vec<f64>,
    pub t_center: f64,
    pub t_half_width: f64,
}

fn beta(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - s * s;
    (q.powi(4), -8.0 * s * q.powi(3))
}

impl SpaceTimeBump {
    /// Value and spatial gradient at `(X, t)`.
    pub fn eval(&self, x: &[f64], t: f64, g: &mut [f64]) -> f64 {
        let (bt, _) = beta((t - self.t_center) / self.t_half_width);
        let n = self.center.len();
        let mut vals = [(0.0, 0.0); 16];
        let mut prod = bt;
        for k in 0..n {
            vals[k] = beta((x[k] - self.center[k]) / self.half_widths[k]);
            prod *= vals[k].0;
        }
        for k in 0..n {
            let mut p = bt * vals[k].1 / self.half_widths[k];
            for (j, v) in vals.iter().enumerate().take(n) {
                if j != k {
                    p *= v.0;
                }
            }
            g[k] = p;
        }
        prod
    }

    fn validate(&self, d: usize, big_t: f64) -> Result<()> {
        if self.center.len() != d + 1 || self.half_widths.len() != d + 1 || d + 1 > 16 {
            return domain("bump dimension mismatch");
        }
        if self.half_widths.iter().any(|w| !(*w > 0.0)) || !(self.t_half_width > 0.0) {
            return domain("bump widths must be positive");
        }
        if self.t_center - self.t_half_width < 0.0 || self.t_center + self.t_half_width > big_t {
            return domain("bump time support must lie in [0, T]");
        }
        if self.center[0] + self.half_widths[0] <= 0.0 {
            return domain("bump misses the half-space");
        }
        Ok(())
    }
}

/// Twelve bumps in `ℝ^{d+1}_+ × (0,T)`, several touching the thin set and
/// several straddling `x₁ = 0`.
pub fn default_bump_family(d: usize, big_t: f64) -> Vec<SpaceTimeBump> {
    let c0 = [0.0, 0.0, 0.3, 0.9, 0.0, 0.6, 1.4, 0.0, 0.2, 0.0, 1.0, 0.8];
    let c1 = [0.0, 0.35, -0.4, 0.0, 0.8, -0.2, 0.1, -0.9, 0.5, 0.15, -0.6, 0.0];
    let w = [0.6, 0.8, 0.5, 0.5, 1.0, 0.45, 0.7, 0.6, 0.9, 1.2, 0.5, 0.35];
    let tc = [0.5, 0.3, 0.6, 0.45, 0.5, 0.7, 0.35, 0.55, 0.4, 0.5, 0.65, 0.5];
    (0..12)
        .map(|i| {
            let mut center = vec![c0[i], c1[i]];
            let mut half_widths = vec![w[i], w[i]];
            for k in 2..=d {
                center.push(0.25 * ((i + k) % 3) as f64 - 0.25);
                half_widths.push(0.6 + 0.1 * (k % 2) as f64);
            }
            let t_center = tc[i] * big_t;
            SpaceTimeBump { center, half_widths, t_center, t_half_width: 0.25 * big_t }
        })
        .collect()
}

/// Per-axis node list; panels break at 0 so a kink on `x_k = 0` is never
/// inside a panel.
fn axis_nodes(k: usize, lo: f64, hi: f64, a: f64, order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    if k == 0 {
        if lo <= 0.0 {
            let r = gauss_jacobi(order, 0.0, a)?;
            let s = hi.powf(1.0 + a);
            nodes.extend(r.nodes.iter().map(|x| hi * x));
            weights.extend(r.weights.iter().map(|w| w * s));
        } else {
            // geometric panels keep x₀ᵃ well resolved near the thin set
            let mut l = lo;
            while l < hi {
                let h = (2.0 * l).min(hi);
                let r = gauss_legendre_on(order, l, h)?;
                nodes.extend(r.nodes.iter().copied());
                weights.extend(r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powf(a)));
                l = h;
            }
        }
        return Ok((nodes, weights));
    }
    let cuts: Vec<(f64, f64)> = if lo < 0.0 && hi > 0.0 { vec![(lo, 0.0), (0.0, hi)] } else { vec![(lo, hi)] };
    for (l, h) in cuts {
        let r = gauss_legendre_on(order, l, h)?;
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    Ok((nodes, weights))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsolutionReport {
    /// `∫∫[∇U·∇(UΥ) - ∂ₜU·UΥ] x₀ᵃ dX dt` per bump.
    pub values: Vec<f64>,
    pub max: f64,
}

/// Weak subsolution functional of `U` against each bump. `U` is a weak
/// subsolution when every value is `≤ 0`.
pub fn subsolution_check(
    u: &impl SpaceTimeField,
    bumps: &[SpaceTimeBump],
    a: WeightParam,
    big_t: f64,
    order: usize,
) -> Result<SubsolutionReport> {
    let n = u.space_dim();
    if bumps.is_empty() {
        return domain("empty bump family");
    }
    let mut values = Vec::with_capacity(bumps.len());
    for b in bumps {
        b.validate(n - 1, big_t)?;
        let mut axes = Vec::with_capacity(n + 1);
        for k in 0..n {
            let lo = b.center[k] - b.half_widths[k];
            let hi = b.center[k] + b.half_widths[k];
            axes.push(axis_nodes(k, if k == 0 { lo.max(0.0) } else { lo }, hi, a.get(), order)?);
        }
        let tr = gauss_legendre_on(order, b.t_center - b.t_half_width, b.t_center + b.t_half_width)?;
        axes.push((tr.nodes, tr.weights));
        let sizes: Vec<usize> = axes.iter().map(|ax| ax.0.len()).collect();
        let total: usize = sizes.iter().product();
        let v = chunked_sum(
            total,
            n + 1,
            |i, buf| {
                let mut rem = i;
                let mut w = 1.0;
                for (k, ax) in axes.iter().enumerate().rev() {
                    let j = rem % sizes[k];
                    rem /= sizes[k];
                    buf[k] = ax.0[j];
                    w *= ax.1[j];
                }
                w
            },
            |p| {
                let (x, t) = (&p[..n], p[n]);
                let mut gu = [0.0f64; 16];
                let mut gb = [0.0f64; 16];
                u.gradient(x, t, &mut gu[..n]);
                let ups = b.eval(x, t, &mut gb[..n]);
                let uv = u.value(x, t);
                let g2: f64 = gu[..n].iter().map(|c| c * c).sum();
                let gg: f64 = gu[..n].iter().zip(&gb[..n]).map(|(p, q)| p * q).sum();
                g2 * ups + uv * gg - u.dt(x, t) * uv * ups
            },
        )?;
        values.push(v);
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(SubsolutionReport { values, max })
}
