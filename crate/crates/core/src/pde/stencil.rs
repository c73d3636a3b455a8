//! Conservative finite-volume discretization of `div(|y₀|ᵃ∇V)` on a
//! [`GridSpec`], and a Jacobi-preconditioned conjugate gradient solver.
//!
//! Equations are divided by the cell volume, so node `p` reads
//! `Σ_q c_pq (V_q - V_p) = K_p M_p` with `c = |y₀|ᵃ_{face}/h₀²` across `y₀`
//! faces, `c = M_p/h_k²` across tangential faces and `M_p` the cell average
//! of `|y₀|ᵃ`. On a half-space grid the `y₀ = 0` face carries no flux.

use rayon::prelude::*;

use crate::constants::WeightParam;
use crate::error::{domain, Error, Result};

use super::grid::GridSpec;

const CHUNK: usize = 4096;

/// `∫_l^u |y|ᵃ dy`.
fn weight_integral(l: f64, u: f64, a: f64) -> f64 {
    let f = |y: f64| y.signum() * y.abs().powf(1.0 + a) / (1.0 + a);
    f(u) - f(l)
}

#[derive(Clone, Debug)]
pub struct FvOperator {
    pub grid: GridSpec,
    pub a: WeightParam,
    /// Nodes with prescribed values.
    pub fixed: Vec<bool>,
    /// Cell average of `|y₀|ᵃ` per `y₀` index.
    measure: Vec<f64>,
    /// `|y₀|ᵃ/h₀²` at the face between `y₀` indices `i` and `i+1`.
    face: Vec<f64>,
    inv_h2: Vec<f64>,
    strides: Vec<usize>,
}

impl FvOperator {
    /// `fixed` must cover the whole outer boundary; a half-space grid may
    /// leave its `y₀ = 0` face free (zero-flux condition).
    pub fn new(grid: GridSpec, a: WeightParam, fixed: Vec<bool>) -> Result<Self> {
        if fixed.len() != grid.len() {
            return domain("fixed mask does not match the grid");
        }
        if let Some(p) = (0..grid.len()).find(|&p| !fixed[p] && grid.on_outer_boundary(p)) {
            return domain(format!("boundary node {p} is not prescribed"));
        }
        if !fixed.iter().any(|&f| f) {
            return Err(Error::Solver("no prescribed node: the Neumann problem is singular".into()));
        }
        let av = a.get();
        let h0 = grid.spacing(0);
        let m0 = grid.counts()[0];
        let measure = (0..m0)
            .map(|i| {
                let y = grid.coord(0, i);
                let l = (y - h0 / 2.0).max(grid.lo()[0]);
                let u = (y + h0 / 2.0).min(grid.hi()[0]);
                weight_integral(l, u, av) / h0
            })
            .collect();
        let face =
            (0..m0 - 1).map(|i| (0.5 * (grid.coord(0, i) + grid.coord(0, i + 1))).abs().powf(av) / (h0 * h0)).collect();
        let inv_h2 = grid.spacings().iter().map(|h| 1.0 / (h * h)).collect();
        let strides = grid.strides();
        Ok(FvOperator { grid, a, fixed, measure, face, inv_h2, strides })
    }

    /// `M_p` at node `p`.
    pub fn measure_at(&self, p: usize) -> f64 {
        self.measure[p / self.strides[0]]
    }

    pub fn unknowns(&self) -> usize {
        self.fixed.iter().filter(|&&f| !f).count()
    }

    /// Visits the neighbours `(q, c_pq)` of an interior or thin-face node.
    fn for_neighbours(&self, p: usize, mut f: impl FnMut(usize, f64)) {
        let counts = self.grid.counts();
        let i0 = p / self.strides[0];
        if i0 > 0 {
            f(p - self.strides[0], self.face[i0 - 1]);
        }
        if i0 + 1 < counts[0] {
            f(p + self.strides[0], self.face[i0]);
        }
        let m = self.measure[i0];
        for k in 1..self.grid.ndim() {
            let ik = p / self.strides[k] % counts[k];
            let c = m * self.inv_h2[k];
            if ik > 0 {
                f(p - self.strides[k], c);
            }
            if ik + 1 < counts[k] {
                f(p + self.strides[k], c);
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|p| {
                let mut s = 0.0;
                if !self.fixed[p] {
                    self.for_neighbours(p, |_, c| s += c);
                }
                s
            })
            .collect()
    }

    /// `out_p = α M_p x_p + β Σ_q c_pq (x_p - x_q)` on free nodes, 0 on fixed.
    pub fn apply(&self, alpha: f64, beta: f64, x: &[f64], out: &mut [f64]) {
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
            for (j, o) in chunk.iter_mut().enumerate() {
                let p = ci * CHUNK + j;
                if self.fixed[p] {
                    *o = 0.0;
                    continue;
                }
                let xp = x[p];
                let mut s = 0.0;
                self.for_neighbours(p, |q, c| s += c * (xp - x[q]));
                *o = alpha * self.measure_at(p) * xp + beta * s;
            }
        });
    }

    /// Residual `K_p M_p + (A V)_p` of the elliptic equation on free nodes.
    pub fn residual(&self, v: &[f64], source: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; v.len()];
        self.apply(0.0, 1.0, v, &mut r);
        for p in 0..v.len() {
            if !self.fixed[p] {
                r[p] += source[p] * self.measure_at(p);
            }
        }
        r
    }

    /// Discrete weighted Dirichlet energy `Σ_edges c (ΔV)² · Πh`, each edge
    /// counted once.
    pub fn energy(&self, v: &[f64]) -> f64 {
        let vol: f64 = self.grid.spacings().iter().product();
        let counts = self.grid.counts();
        let parts: Vec<f64> = (0..v.len())
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map(|ps| {
                let mut s = 0.0;
                for &p in ps {
                    let i0 = p / self.strides[0];
                    if i0 + 1 < counts[0] {
                        let q = p + self.strides[0];
                        s += self.face[i0] * (v[q] - v[p]).powi(2);
                    }
                    for k in 1..self.grid.ndim() {
                        if p / self.strides[k] % counts[k] + 1 < counts[k] {
                            let q = p + self.strides[k];
                            s += self.measure[i0] * self.inv_h2[k] * (v[q] - v[p]).powi(2);
                        }
                    }
                }
                s
            })
            .collect();
        vol * parts.iter().sum::<f64>()
    }
}

/// Deterministic dot product: fixed chunking, in-order reduction.
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    let parts: Vec<f64> =
        x.par_chunks(CHUNK).zip(y.par_chunks(CHUNK)).map(|(a, b)| a.iter().zip(b).map(|(p, q)| p * q).sum()).collect();
    parts.iter().sum()
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverOptions {
    /// Target relative residual `‖r‖/‖b‖`.
    pub tol: f64,
    /// Relative residual still accepted when the iteration cap is hit.
    pub accept: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-13, accept: 1e-10, max_iter: 20_000 }
    }
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `(α M + β A) x = b` on the free nodes by preconditioned CG; `x`
/// carries the initial guess on free nodes and is left untouched on fixed
/// ones.
pub fn pcg(
    op: &FvOperator,
    alpha: f64,
    beta: f64,
    b: &[f64],
    x: &mut [f64],
    opts: SolverOptions,
) -> Result<SolveStats> {
    let n = x.len();
    let diag: Vec<f64> = op
        .diagonal()
        .iter()
        .enumerate()
        .map(|(p, d)| if op.fixed[p] { 0.0 } else { alpha * op.measure_at(p) + beta * d })
        .collect();
    if let Some(p) = (0..n).find(|&p| !op.fixed[p] && !(diag[p] > 0.0)) {
        return Err(Error::Solver(format!("non-positive diagonal {:e} at node {p}", diag[p])));
    }
    let mut xf: Vec<f64> = (0..n).map(|p| if op.fixed[p] { 0.0 } else { x[p] }).collect();
    let bn = dot(b, b).sqrt();
    if bn == 0.0 {
        for p in 0..n {
            if !op.fixed[p] {
                x[p] = 0.0;
            }
        }
        return Ok(SolveStats { iterations: 0, relative_residual: 0.0 });
    }
    let mut ax = vec![0.0; n];
    op.apply(alpha, beta, &xf, &mut ax);
    let mut r: Vec<f64> = (0..n).map(|p| if op.fixed[p] { 0.0 } else { b[p] - ax[p] }).collect();
    let mut z: Vec<f64> = (0..n).map(|p| if op.fixed[p] { 0.0 } else { r[p] / diag[p] }).collect();
    let mut dir = z.clone();
    let mut rz = dot(&r, &z);
    let mut rel = dot(&r, &r).sqrt() / bn;
    let mut it = 0;
    while rel > opts.tol && it < opts.max_iter {
        op.apply(alpha, beta, &dir, &mut ax);
        let curv = dot(&dir, &ax);
        if !(curv > 0.0) {
            return Err(Error::Solver(format!("operator lost positivity at iteration {it}: pᵀAp = {curv:e}")));
        }
        let step = rz / curv;
        for p in 0..n {
            xf[p] += step * dir[p];
            r[p] -= step * ax[p];
        }
        for p in 0..n {
            z[p] = if op.fixed[p] { 0.0 } else { r[p] / diag[p] };
        }
        let rz_new = dot(&r, &z);
        let gamma = rz_new / rz;
        rz = rz_new;
        for p in 0..n {
            dir[p] = z[p] + gamma * dir[p];
        }
        it += 1;
        // periodic true-residual refresh guards against drift
        if it % 200 == 0 {
            op.apply(alpha, beta, &xf, &mut ax);
            for p in 0..n {
                r[p] = if op.fixed[p] { 0.0 } else { b[p] - ax[p] };
            }
        }
        rel = dot(&r, &r).sqrt() / bn;
    }
    if rel > opts.accept {
        return Err(Error::Solver(format!(
            "CG stopped after {it} iterations at relative residual {rel:e} ({} unknowns)",
            op.unknowns()
        )));
    }
    for p in 0..n {
        if !op.fixed[p] {
            x[p] = xf[p];
        }
    }
    Ok(SolveStats { iterations: it, relative_residual: rel })
}
