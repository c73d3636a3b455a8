//! The maps `fₙ`, `Fₙ` from the lifted half-space `ℝ^{dn+1}_+` to space-time,
//! lifted functions `Vₙ = U∘Fₙ` with their source `Kₙ`, and numerical checks
//! of the chain-rule identities and boundary-condition inheritance.
//!
//! A lifted point is `Y = (y₀, y)` with `y` stored row-major as
//! `y[i·n + j] = y_{i,j}` (`i < d`, `j < n`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{mixing_m, DimensionSpec, WeightParam};
use crate::error::{domain, Result};
use crate::field::{ScalarField, SpaceTimeField};
use crate::kernels::{richardson_limit, thin_exponents, weighted_flux_limit, FluxOptions};
use crate::pde::BoundaryType;

/// `Y = (y₀, y_{i,j})`.
#[derive(Clone, Debug, PartialEq)]
pub struct HighDimPoint {
    pub y0: f64,
    pub y: Vec<f64>,
}

impl HighDimPoint {
    pub fn new(y0: f64, y: Vec<f64>, dims: DimensionSpec) -> Result<Self> {
        if y.len() != dims.lifted() {
            return domain(format!("lifted point needs {} tangential coordinates, got {}", dims.lifted(), y.len()));
        }
        if !(y0 >= 0.0) {
            return domain(format!("y0 must be nonnegative, got {y0}"));
        }
        Ok(HighDimPoint { y0, y })
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.y.len() + 1);
        v.push(self.y0);
        v.extend_from_slice(&self.y);
        v
    }

    pub fn norm2(&self) -> f64 {
        self.y0 * self.y0 + self.y.iter().map(|v| v * v).sum::<f64>()
    }
}

/// `fₙ(Y) = (√n y₀, Σⱼ y_{1,j}, …, Σⱼ y_{d,j})` for `Y` given as coordinates.
pub fn map_fn_coords(y: &[f64], dims: DimensionSpec, out: &mut [f64]) {
    let n = dims.n;
    out[0] = (n as f64).sqrt() * y[0];
    for i in 0..dims.d {
        out[i + 1] = y[1 + i * n..1 + (i + 1) * n].iter().sum();
    }
}

pub fn map_fn(p: &HighDimPoint, dims: DimensionSpec) -> Vec<f64> {
    let mut out = vec![0.0; dims.d + 1];
    map_fn_coords(&p.coords(), dims, &mut out);
    out
}

/// `Fₙ(Y) = (fₙ(Y), |Y|²/M)`.
pub fn map_big_fn(p: &HighDimPoint, dims: DimensionSpec, a: WeightParam) -> (Vec<f64>, f64) {
    (map_fn(p, dims), p.norm2() / mixing_m(dims, a))
}

/// `Vₙ = U∘Fₙ` as a field on `ℝ^{dn+1}`.
pub struct LiftedField<U> {
    pub u: U,
    pub dims: DimensionSpec,
    pub a: WeightParam,
    m: f64,
}

pub fn lift_solution<U: SpaceTimeField>(u: U, dims: DimensionSpec, a: WeightParam) -> Result<LiftedField<U>> {
    if u.space_dim() != dims.d + 1 {
        return domain(format!("solution has space dimension {}, lift expects {}", u.space_dim(), dims.d + 1));
    }
    Ok(LiftedField { u, dims, a, m: mixing_m(dims, a) })
}

impl<U: SpaceTimeField> LiftedField<U> {
    pub fn mixing(&self) -> f64 {
        self.m
    }

    /// `Fₙ(Y)` for coordinates `Y`.
    pub fn project(&self, y: &[f64]) -> (Vec<f64>, f64) {
        let mut x = vec![0.0; self.dims.d + 1];
        map_fn_coords(y, self.dims, &mut x);
        let t = y.iter().map(|v| v * v).sum::<f64>() / self.m;
        (x, t)
    }

    /// `Kₙ(Y) = (4/M) J(Fₙ(Y))`.
    pub fn source(&self, y: &[f64]) -> f64 {
        let (x, t) = self.project(y);
        4.0 / self.m * self.u.source_j(&x, t)
    }
}

impl<U: SpaceTimeField> ScalarField for LiftedField<U> {
    fn dim(&self) -> usize {
        self.dims.lifted() + 1
    }

    fn value(&self, y: &[f64]) -> f64 {
        let (x, t) = self.project(y);
        self.u.value(&x, t)
    }

    fn gradient(&self, y: &[f64], g: &mut [f64]) {
        let (x, t) = self.project(y);
        let mut gu = vec![0.0; self.dims.d + 1];
        self.u.gradient(&x, t, &mut gu);
        let ut = self.u.dt(&x, t);
        let n = self.dims.n;
        g[0] = (n as f64).sqrt() * gu[0] + 2.0 * y[0] / self.m * ut;
        for i in 0..self.dims.d {
            for j in 0..n {
                let k = 1 + i * n + j;
                g[k] = gu[i + 1] + 2.0 * y[k] / self.m * ut;
            }
        }
    }
}

/// Max residuals of the four chain-rule identities.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct ChainRuleReport {
    pub d_y0: f64,
    pub d_yij: f64,
    pub euler: f64,
    pub grad_norm: f64,
}

impl ChainRuleReport {
    pub fn max(&self) -> f64 {
        self.d_y0.max(self.d_yij).max(self.euler).max(self.grad_norm)
    }
}

/// Random lifted points with `y₀ ∈ [0.1, 1]` and tangential coordinates in
/// `[-1, 1]`.
pub fn random_lift_points(dims: DimensionSpec, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut y = vec![rng.random_range(0.1..1.0)];
            y.extend((0..dims.lifted()).map(|_| rng.random_range(-1.0..1.0)));
            y
        })
        .collect()
}

fn central_gradient(f: &dyn Fn(&[f64]) -> f64, y: &[f64], h_rel: f64) -> Vec<f64> {
    let mut p = y.to_vec();
    (0..y.len())
        .map(|k| {
            let h = h_rel * (1.0 + y[k].abs());
            p[k] = y[k] + h;
            let fp = f(&p);
            p[k] = y[k] - h;
            let fm = f(&p);
            p[k] = y[k];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Compares finite differences of `U∘Fₙ` with the displayed chain-rule
/// formulas: `∂_{y₀}Vₙ`, `∂_{y_{ij}}Vₙ`, `Y·∇Vₙ = (X,2t)·∇_{(X,t)}U` and the
/// expansion of `|∇Vₙ|²`.
pub fn verify_chain_rule<U: SpaceTimeField>(
    u: &U,
    dims: DimensionSpec,
    a: WeightParam,
    samples: &[Vec<f64>],
    h_fd: f64,
) -> Result<ChainRuleReport> {
    let lifted = lift_solution(u, dims, a)?;
    let m = lifted.mixing();
    let n = dims.n as f64;
    let mut rep = ChainRuleReport::default();
    let mut gu = vec![0.0; dims.d + 1];
    for y in samples {
        if y.len() != dims.lifted() + 1 {
            return domain("sample has the wrong dimension");
        }
        let fd = central_gradient(&|p| lifted.value(p), y, h_fd);
        let mut an = vec![0.0; y.len()];
        lifted.gradient(y, &mut an);
        rep.d_y0 = rep.d_y0.max((fd[0] - an[0]).abs());
        for k in 1..y.len() {
            rep.d_yij = rep.d_yij.max((fd[k] - an[k]).abs());
        }
        let (x, t) = lifted.project(y);
        u.gradient(&x, t, &mut gu);
        let ut = u.dt(&x, t);
        let x_grad: f64 = x.iter().zip(&gu).map(|(p, q)| p * q).sum();
        let euler_fd: f64 = y.iter().zip(&fd).map(|(p, q)| p * q).sum();
        rep.euler = rep.euler.max((euler_fd - (x_grad + 2.0 * t * ut)).abs());
        let norm_fd: f64 = fd.iter().map(|v| v * v).sum();
        let gu2: f64 = gu.iter().map(|v| v * v).sum();
        let expansion = n * gu2 + 4.0 * t / m * ut * ut + 4.0 / m * x_grad * ut;
        rep.grad_norm = rep.grad_norm.max((norm_fd - expansion).abs());
    }
    Ok(rep)
}

/// Max over samples of `|div(y₀ᵃ∇Vₙ) - y₀ᵃKₙ|`, with the divergence taken by
/// the conservative three-point stencil of step `h` in every coordinate.
pub fn verify_elliptic_equation<U: SpaceTimeField>(
    u: &U,
    dims: DimensionSpec,
    a: WeightParam,
    samples: &[Vec<f64>],
    h: f64,
) -> Result<f64> {
    let lifted = lift_solution(u, dims, a)?;
    let av = a.get();
    let mut worst: f64 = 0.0;
    for y in samples {
        if !(y[0] > h) {
            return domain("samples must satisfy y0 > h");
        }
        let mut p = y.clone();
        let v0 = lifted.value(y);
        let w = |s: f64| s.powf(av);
        p[0] = y[0] + h;
        let vp = lifted.value(&p);
        p[0] = y[0] - h;
        let vm = lifted.value(&p);
        p[0] = y[0];
        let mut div = (w(y[0] + h / 2.0) * (vp - v0) - w(y[0] - h / 2.0) * (v0 - vm)) / (h * h);
        let mut lap_t = 0.0;
        for k in 1..y.len() {
            p[k] = y[k] + h;
            let fp = lifted.value(&p);
            p[k] = y[k] - h;
            let fm = lifted.value(&p);
            p[k] = y[k];
            lap_t += (fp - 2.0 * v0 + fm) / (h * h);
        }
        div += w(y[0]) * lap_t;
        worst = worst.max((div - w(y[0]) * lifted.source(y)).abs());
    }
    Ok(worst)
}

/// Outcome of [`verify_bc_inheritance`].
#[derive(Clone, Debug, Serialize)]
pub struct BcReport {
    pub kind: BoundaryType,
    /// Largest violation over the tangential samples.
    pub max_violation: f64,
    pub samples: usize,
}

/// Checks that `Vₙ` inherits the boundary condition of `U` at the given
/// tangential points `y ∈ ℝ^{dn}`: `∂ᵥᵃVₙ(0,y) = 0` (type I) or
/// `Vₙ(0⁺,y) = 0` and `∇_yVₙ(0⁺,y) = 0` (type II), via extrapolation in `y₀`.
pub fn verify_bc_inheritance<U: SpaceTimeField>(
    u: &U,
    kind: BoundaryType,
    dims: DimensionSpec,
    a: WeightParam,
    tangential: &[Vec<f64>],
    opts: FluxOptions,
) -> Result<BcReport> {
    let lifted = lift_solution(u, dims, a)?;
    let mut worst: f64 = 0.0;
    let dim = dims.lifted() + 1;
    for y in tangential {
        if y.len() != dims.lifted() {
            return domain("tangential sample has the wrong dimension");
        }
        let at = |s: f64| {
            let mut p = Vec::with_capacity(dim);
            p.push(s);
            p.extend_from_slice(y);
            p
        };
        match kind {
            BoundaryType::TypeI => {
                let flux = weighted_flux_limit(|s| lifted.value(&at(s)), a, opts)?;
                worst = worst.max(flux.abs());
            }
            BoundaryType::TypeII => {
                let exps = thin_exponents(a.get());
                let v = richardson_limit(|s| lifted.value(&at(s)), &exps, opts)?;
                worst = worst.max(v.abs());
                for k in 1..dim {
                    let gk = richardson_limit(
                        |s| {
                            let mut g = vec![0.0; dim];
                            lifted.gradient(&at(s), &mut g);
                            g[k]
                        },
                        &exps,
                        opts,
                    )?;
                    worst = worst.max(gk.abs());
                }
            }
        }
    }
    Ok(BcReport { kind, max_violation: worst, samples: tangential.len() })
}
