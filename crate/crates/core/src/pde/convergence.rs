//! Manufactured-solution error measurements for the grid solvers.

use nalgebra::{DMatrix, DVector};

use super::elliptic::{solve_degenerate_elliptic, Region, ThinCondition};
use super::grid::{GridSpec, WeightedField};
use super::modes::make_aharmonic_polynomial;
use super::parabolic::{evolve_backward_parabolic, FarField, ParabolicOptions};
use super::solutions::{ClosedForm, ClosedFormSolution};
use super::stencil::SolverOptions;
use crate::constants::WeightParam;
use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::poly::Poly;

/// Max-norm error of the elliptic solver on `[0,1]×[-1,1]` with `m` nodes
/// in `y₀`, for the quartic a-harmonic polynomial in `(y₀, y₁)`.
pub fn elliptic_manufactured_error(a: WeightParam, m: usize) -> Result<f64> {
    let p = make_aharmonic_polynomial(&Poly::monomial(vec![4], 1.0), a)?.poly;
    let g = GridSpec::half_space(1, 1.0, m, 1.0, 2 * m - 1)?;
    let sol = solve_degenerate_elliptic(
        &g,
        a,
        |_| 0.0,
        |y| p.eval(y),
        ThinCondition::TypeI,
        Region::Box,
        SolverOptions::default(),
    )?;
    let exact = WeightedField::sample(g, a, |y| p.eval(y))?;
    sol.field.max_abs_diff(&exact)
}

/// Max-norm error at `t = 0.5` of the backward solver run from `T = 1` for
/// the caloric polynomial generated by `x₁⁴`.
pub fn parabolic_manufactured_error(a: WeightParam, m: usize, steps: usize) -> Result<f64> {
    let u = ClosedForm::new(ClosedFormSolution::CaloricPoly(Poly::monomial(vec![0, 4], 1.0)), 1, a)?;
    let g = GridSpec::half_space(1, 1.0, m, 1.0, 2 * m - 1)?;
    let exact = |y: &[f64], t: f64| u.value(y, t);
    let opts = ParabolicOptions { steps, ..Default::default() };
    let h = evolve_backward_parabolic(|y| u.value(y, 1.0), FarField::Given(&exact), &g, a, 1.0, 0.5, opts)?;
    let e = WeightedField::sample(g, a, |y| u.value(y, 0.5))?;
    h.last().1.max_abs_diff(&e)
}

/// Successive error ratios `e_k / e_{k+1}`.
pub fn error_ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}

/// Largest nodal difference between the `a = 0` solver and a dense LU
/// solve of the 5-point Laplacian with a mirror ghost row below `y₀ = 0`.
pub fn unweighted_reference_gap(m0: usize, m: usize) -> Result<f64> {
    let a = WeightParam::new(0.0)?;
    let g = GridSpec::half_space(1, 1.0, m0, 1.0, m)?;
    let k = |y: &[f64]| 1.0 + y[0] * y[1];
    let bc = |y: &[f64]| y[1].exp() * y[0].cos();
    let sol = solve_degenerate_elliptic(&g, a, k, bc, ThinCondition::TypeI, Region::Box, SolverOptions::default())?;
    let (h0, h1) = (g.spacing(0), g.spacing(1));
    let idx = |i: usize, j: usize| i * m + j;
    let n = m0 * m;
    let mut mat = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    let mut y = [0.0; 2];
    for i in 0..m0 {
        for j in 0..m {
            let p = idx(i, j);
            g.point(p, &mut y);
            if i + 1 == m0 || j == 0 || j + 1 == m {
                mat[(p, p)] = 1.0;
                rhs[p] = bc(&y);
                continue;
            }
            let down = if i == 0 { idx(1, j) } else { idx(i - 1, j) };
            mat[(p, p)] = -2.0 / (h0 * h0) - 2.0 / (h1 * h1);
            mat[(p, idx(i + 1, j))] += 1.0 / (h0 * h0);
            mat[(p, down)] += 1.0 / (h0 * h0);
            mat[(p, idx(i, j - 1))] += 1.0 / (h1 * h1);
            mat[(p, idx(i, j + 1))] += 1.0 / (h1 * h1);
            rhs[p] = k(&y);
        }
    }
    let reference = mat.lu().solve(&rhs).ok_or_else(|| Error::Solver("reference matrix is singular".into()))?;
    Ok((0..n).map(|p| (sol.field.values[p] - reference[p]).abs()).fold(0.0, f64::max))
}
