//! Backward degenerate parabolic problems `∂ₜU + x₀^{-a}div(x₀ᵃ∇U) = 0`,
//! evolved forward in `s = T - t` with a theta scheme on the conservative
//! stencil and a type I thin face.

use crate::constants::WeightParam;
use crate::error::{domain, Error, Result};

use super::grid::{GridSpec, WeightedField};
use super::stencil::{pcg, FvOperator, SolverOptions};

/// Values on the outer boundary of the truncated box.
#[derive(Clone, Copy)]
pub enum FarField<'a> {
    Zero,
    /// Keep the terminal values.
    Frozen,
    /// `g(X, t)`.
    Given(&'a (dyn Fn(&[f64], f64) -> f64 + Sync)),
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ParabolicOptions {
    pub steps: usize,
    /// `1/2` is Crank–Nicolson, `1` backward Euler.
    pub theta: f64,
    /// Keep every `record_every`-th step (the terminal and final states are
    /// always kept).
    pub record_every: usize,
    pub solver: SolverOptions,
}

impl Default for ParabolicOptions {
    fn default() -> Self {
        ParabolicOptions { steps: 32, theta: 0.5, record_every: 1, solver: SolverOptions::default() }
    }
}

/// Snapshots in order of decreasing `t`, starting at `t = T`.
#[derive(Clone, Debug)]
pub struct ParabolicHistory {
    pub times: Vec<f64>,
    pub fields: Vec<WeightedField>,
}

impl ParabolicHistory {
    pub fn last(&self) -> (f64, &WeightedField) {
        (self.times[self.times.len() - 1], &self.fields[self.fields.len() - 1])
    }
}

/// Evolves terminal data at `t = T` down to `t = t_end` on a half-space box.
pub fn evolve_backward_parabolic(
    terminal: impl Fn(&[f64]) -> f64,
    far: FarField<'_>,
    grid: &GridSpec,
    a: WeightParam,
    big_t: f64,
    t_end: f64,
    opts: ParabolicOptions,
) -> Result<ParabolicHistory> {
    if !grid.is_half_space() {
        return domain("the backward evolver needs a half-space grid");
    }
    if !(t_end < big_t) || !t_end.is_finite() || !big_t.is_finite() {
        return domain(format!("need t_end < T, got {t_end} and {big_t}"));
    }
    if opts.steps == 0 || opts.record_every == 0 || !(opts.theta >= 0.5 && opts.theta <= 1.0) {
        return domain("need steps >= 1, record_every >= 1 and theta in [1/2, 1]");
    }
    let fixed: Vec<bool> = (0..grid.len()).map(|p| grid.on_outer_boundary(p)).collect();
    let op = FvOperator::new(grid.clone(), a, fixed)?;
    let mut u = WeightedField::sample(grid.clone(), a, terminal)?.values;
    let frozen = u.clone();
    let ds = (big_t - t_end) / opts.steps as f64;
    let n = u.len();
    let mut y = vec![0.0; grid.ndim()];
    let mut history =
        ParabolicHistory { times: vec![big_t], fields: vec![WeightedField::new(grid.clone(), a, u.clone())?] };
    let mut au = vec![0.0; n];
    let mut af = vec![0.0; n];
    for step in 1..=opts.steps {
        let t = if step == opts.steps { t_end } else { big_t - step as f64 * ds };
        op.apply(0.0, 1.0, &u, &mut au);
        let mut next_fixed = vec![0.0; n];
        for p in 0..n {
            if op.fixed[p] {
                next_fixed[p] = match far {
                    FarField::Zero => 0.0,
                    FarField::Frozen => frozen[p],
                    FarField::Given(g) => {
                        grid.point(p, &mut y);
                        g(&y, t)
                    }
                };
            }
        }
        op.apply(0.0, 1.0, &next_fixed, &mut af);
        let b: Vec<f64> = (0..n)
            .map(|p| {
                if op.fixed[p] {
                    0.0
                } else {
                    op.measure_at(p) * u[p] - (1.0 - opts.theta) * ds * au[p] - opts.theta * ds * af[p]
                }
            })
            .collect();
        let mut next = u.clone();
        for p in 0..n {
            if op.fixed[p] {
                next[p] = next_fixed[p];
            }
        }
        pcg(&op, 1.0, opts.theta * ds, &b, &mut next, opts.solver)
            .map_err(|e| Error::Solver(format!("step {step} (t = {t}) rejected: {e}")))?;
        u = next;
        if step % opts.record_every == 0 || step == opts.steps {
            history.times.push(t);
            history.fields.push(WeightedField::new(grid.clone(), a, u.clone())?);
        }
    }
    Ok(history)
}
