//! `div(|y₀|ᵃ∇V) = K|y₀|ᵃ` on half-space boxes, boxes and balls.

use serde::{Deserialize, Serialize};

use crate::constants::WeightParam;
use crate::error::{domain, Error, Result};

use super::grid::{GridSpec, WeightedField};
use super::stencil::{pcg, FvOperator, SolveStats, SolverOptions};

/// Treatment of the `y₀ = 0` face of a half-space grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThinCondition {
    /// Zero weighted flux.
    TypeI,
    /// `V = 0`; the tangential gradient then vanishes as well.
    TypeII,
    /// Prescribed from the boundary data.
    Dirichlet,
}

/// Region on which the equation is solved; all grid nodes outside it carry
/// boundary data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Box,
    /// `|Y| < r`.
    Ball(f64),
}

#[derive(Clone, Debug)]
pub struct EllipticSolution {
    pub field: WeightedField,
    pub stats: SolveStats,
    /// Max relative residual of the discrete equations.
    pub residual: f64,
}

fn fixed_mask(grid: &GridSpec, thin: ThinCondition, region: Region) -> Vec<bool> {
    let mut y = vec![0.0; grid.ndim()];
    let m0 = grid.strides()[0];
    (0..grid.len())
        .map(|p| {
            grid.point(p, &mut y);
            let outside = match region {
                Region::Box => false,
                Region::Ball(r) => y.iter().map(|v| v * v).sum::<f64>() >= r * r,
            };
            let thin_fixed = grid.is_half_space() && p < m0 && thin != ThinCondition::TypeI;
            outside || thin_fixed || grid.on_outer_boundary(p)
        })
        .collect()
}

fn max_relative_residual(op: &FvOperator, v: &[f64], k: &[f64]) -> f64 {
    let r = op.residual(v, k);
    let diag = op.diagonal();
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (0..v.len())
        .filter(|&p| !op.fixed[p])
        .map(|p| r[p].abs() / (diag[p] * vmax + (k[p] * op.measure_at(p)).abs()).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Solves with source `K` and boundary data `g` (used on every prescribed
/// node; `V = 0` on the thin face for type II).
pub fn solve_degenerate_elliptic(
    grid: &GridSpec,
    a: WeightParam,
    source: impl Fn(&[f64]) -> f64,
    boundary: impl Fn(&[f64]) -> f64,
    thin: ThinCondition,
    region: Region,
    opts: SolverOptions,
) -> Result<EllipticSolution> {
    if !grid.is_half_space() && thin != ThinCondition::Dirichlet {
        return domain("thin-set conditions need a half-space grid");
    }
    let fixed = fixed_mask(grid, thin, region);
    let m0 = grid.strides()[0];
    let mut y = vec![0.0; grid.ndim()];
    let mut v = vec![0.0; grid.len()];
    let mut k = vec![0.0; grid.len()];
    for p in 0..grid.len() {
        grid.point(p, &mut y);
        if fixed[p] {
            v[p] = if thin == ThinCondition::TypeII && grid.is_half_space() && p < m0 { 0.0 } else { boundary(&y) };
        } else {
            k[p] = source(&y);
        }
    }
    if let Some(p) = (0..grid.len()).find(|&p| !v[p].is_finite() || !k[p].is_finite()) {
        grid.point(p, &mut y);
        return domain(format!("non-finite data at {y:?}"));
    }
    let op = FvOperator::new(grid.clone(), a, fixed)?;
    solve_with(&op, v, &k, opts)
}

fn solve_with(op: &FvOperator, mut v: Vec<f64>, k: &[f64], opts: SolverOptions) -> Result<EllipticSolution> {
    // b = -K M - A_uf V_f
    let vf: Vec<f64> = (0..v.len()).map(|p| if op.fixed[p] { v[p] } else { 0.0 }).collect();
    let mut b = vec![0.0; v.len()];
    op.apply(0.0, 1.0, &vf, &mut b);
    for p in 0..v.len() {
        b[p] = if op.fixed[p] { 0.0 } else { -k[p] * op.measure_at(p) - b[p] };
    }
    let stats = pcg(op, 0.0, 1.0, &b, &mut v, opts)?;
    let residual = max_relative_residual(op, &v, k);
    let field = WeightedField::new(op.grid.clone(), op.a, v)?;
    Ok(EllipticSolution { field, stats, residual })
}

/// Discrete weighted Dirichlet energy of a field.
pub fn dirichlet_energy(v: &WeightedField) -> Result<f64> {
    let fixed = (0..v.grid.len()).map(|p| v.grid.on_outer_boundary(p)).collect();
    Ok(FvOperator::new(v.grid.clone(), v.a, fixed)?.energy(&v.values))
}

fn is_even(v: &WeightedField, tol: f64) -> bool {
    let g = &v.grid;
    if g.is_half_space() {
        return false;
    }
    let m0 = g.counts()[0];
    let slab = g.strides()[0];
    let scale = v.values.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    (0..m0 / 2).all(|i| {
        let j = m0 - 1 - i;
        (0..slab).all(|s| (v.values[i * slab + s] - v.values[j * slab + s]).abs() <= tol * scale)
    })
}

/// The weakly a-harmonic field on `|Y| < r` with the trace of `v`; `v` lives
/// on a full (symmetric) box.
pub fn harmonic_replacement(v: &WeightedField, r: f64, opts: SolverOptions) -> Result<WeightedField> {
    if v.grid.is_half_space() {
        return domain("harmonic replacement needs a full box; use even_extension first");
    }
    let fixed = fixed_mask(&v.grid, ThinCondition::Dirichlet, Region::Ball(r));
    let op = FvOperator::new(v.grid.clone(), v.a, fixed)?;
    let zeros = vec![0.0; v.values.len()];
    let out = solve_with(&op, v.values.clone(), &zeros, opts)?.field;
    if is_even(v, 1e-12) && !is_even(&out, 1e-10) {
        return Err(Error::Check {
            name: "even-replacement".into(),
            detail: "even input produced a non-even replacement".into(),
        });
    }
    Ok(out)
}

/// `Σ_edges c ΔV Δφ Πh + Σ_p K_p M_p φ_p Πh` for a test function `φ`
/// vanishing near the box boundary: the discrete weak form of the equation.
pub fn weak_residual(v: &WeightedField, source: impl Fn(&[f64]) -> f64, phi: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let g = &v.grid;
    let fixed = (0..g.len()).map(|p| g.on_outer_boundary(p)).collect();
    let op = FvOperator::new(g.clone(), v.a, fixed)?;
    let mut y = vec![0.0; g.ndim()];
    let mut ph = vec![0.0; g.len()];
    let mut k = vec![0.0; g.len()];
    for p in 0..g.len() {
        g.point(p, &mut y);
        ph[p] = phi(&y);
        k[p] = source(&y);
        if g.on_outer_boundary(p) && ph[p] != 0.0 {
            return domain("test function must vanish on the box boundary");
        }
    }
    // Σ φ_p (A V)_p = Σ_edges c ΔV Δφ when φ vanishes on the boundary
    let mut av = vec![0.0; g.len()];
    op.apply(0.0, 1.0, &v.values, &mut av);
    let vol: f64 = g.spacings().iter().product();
    Ok(vol * (0..g.len()).map(|p| ph[p] * (av[p] + k[p] * op.measure_at(p))).sum::<f64>())
}
