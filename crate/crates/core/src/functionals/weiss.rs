//! Weiss energies `W_h` (elliptic, half- and full-ball), the h-homogeneous
//! extension, the epiperimetric slack and the parabolic Weiss functional.

use serde::{Deserialize, Serialize};

use super::almgren::{check_space_dim, height_dirichlet, EllipticRules, SlackReport};
use super::trace::{check_grid, FrequencyTrace, TraceParam};
use super::{local_derivative, FD_REL_STEP};
use crate::constants::{epi_kappa0, WeightParam};
use crate::error::{domain, Error, Result};
use crate::field::{ScalarField, SpaceTimeField};
use crate::poly::Poly;
use crate::quad::HalfspaceGaussRule;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeissParams {
    pub h: f64,
    /// `A = N + a + 2h - 1`.
    pub a_exp: f64,
    /// `δ_h = 1 + ⌊h⌋ - h`.
    pub delta_h: f64,
}

impl WeissParams {
    pub fn new(h: f64, big_n: usize, a: WeightParam) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return domain(format!("homogeneity must be positive, got {h}"));
        }
        if big_n == 0 {
            return domain("N must be at least 1");
        }
        Ok(WeissParams { h, a_exp: big_n as f64 + a.get() + 2.0 * h - 1.0, delta_h: 1.0 + h.floor() - h })
    }

    fn combine(&self, r: f64, d: f64, hh: f64) -> f64 {
        r.powf(-self.a_exp) * d - self.h * r.powf(-(self.a_exp + 1.0)) * hh
    }
}

/// `W_h(r;V) = r^{-A}D - h r^{-(A+1)}H` over the half ball.
pub fn elliptic_weiss(v: &impl ScalarField, r: f64, p: &WeissParams, rules: &EllipticRules) -> Result<f64> {
    let hdl = super::almgren::elliptic_hdl(v, r, rules)?;
    Ok(p.combine(r, hdl.d, hdl.h))
}

/// Full-ball variant with weight `|y₀|ᵃ`.
pub fn elliptic_weiss_full(v: &impl ScalarField, r: f64, p: &WeissParams, rules: &EllipticRules) -> Result<f64> {
    let h = rules.sphere.integrate_full(r, |y| v.value(y).powi(2))?;
    let d = rules.ball.integrate_full(r, |y| v.grad_norm2(y))?;
    Ok(p.combine(r, d, h))
}

/// `V̄(Y) = (|Y|/r)^h V(rY/|Y|)`.
#[derive(Clone, Debug)]
pub struct HExtension<V> {
    pub v: V,
    pub r: f64,
    pub h: f64,
}

pub fn h_extension<V: ScalarField>(v: V, r: f64, h: f64) -> Result<HExtension<V>> {
    if !(r > 0.0) || !(h > 0.0) {
        return domain(format!("extension needs r > 0 and h > 0 (r = {r}, h = {h})"));
    }
    Ok(HExtension { v, r, h })
}

impl<V: ScalarField> ScalarField for HExtension<V> {
    fn dim(&self) -> usize {
        self.v.dim()
    }

    fn value(&self, y: &[f64]) -> f64 {
        let rho = norm(y);
        if rho == 0.0 {
            return 0.0;
        }
        let z: Vec<f64> = y.iter().map(|c| self.r * c / rho).collect();
        (rho / self.r).powf(self.h) * self.v.value(&z)
    }

    fn gradient(&self, y: &[f64], g: &mut [f64]) {
        let rho = norm(y);
        if rho == 0.0 {
            g.iter_mut().for_each(|x| *x = 0.0);
            return;
        }
        let z: Vec<f64> = y.iter().map(|c| self.r * c / rho).collect();
        let val = self.v.value_and_gradient(&z, g);
        let radial: f64 = y.iter().zip(g.iter()).map(|(a, b)| a * b).sum::<f64>() / rho;
        let s = (rho / self.r).powf(self.h);
        for (gi, yi) in g.iter_mut().zip(y) {
            let w = yi / rho;
            *gi = s * (self.h * val * w / rho + (self.r / rho) * (*gi - radial * w));
        }
    }
}

fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `W_h(r; V̄)` from sphere integrals of `V` alone: the radial integral of
/// the extension is explicit.
pub fn elliptic_weiss_of_extension(
    v: &impl ScalarField,
    r: f64,
    p: &WeissParams,
    rules: &EllipticRules,
    full: bool,
) -> Result<f64> {
    let dim = rules.big_n + 1;
    let h = p.h;
    let energy = |y: &[f64]| {
        let mut g = [0.0f64; 32];
        let g = &mut g[..dim];
        let x = v.value_and_gradient(y, g);
        let rad: f64 = y.iter().zip(g.iter()).map(|(a, b)| a * b).sum::<f64>() / r;
        let tang = g.iter().map(|c| c * c).sum::<f64>() - rad * rad;
        h * h * x * x + r * r * tang
    };
    let sq = |y: &[f64]| v.value(y).powi(2);
    let (e, hh) = if full {
        (rules.sphere.integrate_full(r, energy)?, rules.sphere.integrate_full(r, sq)?)
    } else {
        (rules.sphere.integrate(r, energy)?, rules.sphere.integrate(r, sq)?)
    };
    Ok(p.combine(r, e / (r * p.a_exp), hh))
}

/// `(W^e(V,1), W^e(V̄,1))` for `V = Σ c_j P_j` with orthonormal modes of
/// degrees `h_j`, given as `(degree, c_j)`.
pub fn mode_weiss_closed_form(terms: &[(u32, f64)], p: &WeissParams, big_n: usize, a: WeightParam) -> (f64, f64) {
    let base = big_n as f64 + a.get() - 1.0;
    terms.iter().fold((0.0, 0.0), |(w, wb), &(deg, c)| {
        let hj = deg as f64;
        let x = c * c * (hj - p.h);
        (w + x, wb + x * (base + hj + p.h) / p.a_exp)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub radii: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub max_residual: f64,
}

/// Compares `dW_h/dr` with `(A/r)(W(V̄) - W(V)) + r^{-(A+2)}∫_{ℍ_r}(Y·∇V - hV)²`.
pub fn weiss_derivative_identity_check(
    v: &impl ScalarField,
    radii: &[f64],
    p: &WeissParams,
    rules: &EllipticRules,
) -> Result<IdentityCheck> {
    check_grid(radii)?;
    let dim = rules.big_n + 1;
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for &r in radii {
        lhs.push(local_derivative(|s| elliptic_weiss(v, s, p, rules), r, FD_REL_STEP * r)?);
        let w = elliptic_weiss(v, r, p, rules)?;
        let wb = elliptic_weiss_of_extension(v, r, p, rules, false)?;
        let sphere = rules.sphere.integrate(r, |y| {
            let mut g = [0.0f64; 32];
            let g = &mut g[..dim];
            let x = v.value_and_gradient(y, g);
            let yg: f64 = y.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
            (yg - p.h * x).powi(2)
        })?;
        rhs.push(p.a_exp / r * (wb - w) + r.powf(-(p.a_exp + 2.0)) * sphere);
    }
    let max_residual = lhs.iter().zip(&rhs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(IdentityCheck { radii: radii.to_vec(), lhs, rhs, max_residual })
}

/// `(1-κ)W_h(1;V̄) - W_h(1;V)` for an even a-harmonic polynomial `V`.
pub fn epiperimetric_check(v: &Poly, h: f64, kappa: f64, rules: &EllipticRules) -> Result<f64> {
    let p = WeissParams::new(h, rules.big_n, rules.a)?;
    if v.nvars() != rules.big_n + 1 {
        return domain(format!("polynomial has {} variables, expected {}", v.nvars(), rules.big_n + 1));
    }
    if !v.is_even_in(0) {
        return Err(Error::Check { name: "epiperimetric".into(), detail: "field is not even in y0".into() });
    }
    let lap = v.weighted_laplacian(rules.a.get(), rules.big_n + 1)?;
    if lap.max_abs_coefficient() > 1e-9 * v.max_abs_coefficient().max(1.0) {
        return Err(Error::Check { name: "epiperimetric".into(), detail: "field is not a-harmonic".into() });
    }
    let k0 = epi_kappa0(h, rules.big_n, rules.a)?;
    if !(kappa > 0.0) || kappa > k0 * (1.0 + 1e-12) {
        return domain(format!("kappa must lie in (0, {k0}], got {kappa}"));
    }
    let w = elliptic_weiss(v, 1.0, &p, rules)?;
    let wb = elliptic_weiss_of_extension(v, 1.0, &p, rules, false)?;
    Ok((1.0 - kappa) * wb - w)
}

/// `𝒲_h(t) = 2t^{1-h}𝒟 - h t^{-h}ℋ`.
pub fn parabolic_weiss(u: &impl SpaceTimeField, t: f64, h: f64, rule: &HalfspaceGaussRule) -> Result<f64> {
    let (hh, d) = height_dirichlet(u, t, rule)?;
    Ok(2.0 * t.powf(1.0 - h) * d - h * t.powf(-h) * hh)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParabolicWeissCheck {
    pub trace: FrequencyTrace,
    /// Slack of `d𝒲/dt ≥ (δ_h/2t)𝒲 + 𝒫/(2t^{h+1})` at each grid time.
    pub inequality: SlackReport,
}

pub fn parabolic_weiss_trace(
    u: &impl SpaceTimeField,
    times: &[f64],
    h: f64,
    rule: &HalfspaceGaussRule,
) -> Result<ParabolicWeissCheck> {
    check_grid(times)?;
    check_space_dim(u, rule)?;
    if !(h > 0.0) {
        return domain(format!("homogeneity must be positive, got {h}"));
    }
    let delta = 1.0 + h.floor() - h;
    let dim = rule.d + 1;
    let mut values = Vec::with_capacity(times.len());
    let mut slack = Vec::with_capacity(times.len());
    for &t in times {
        let w = parabolic_weiss(u, t, h, rule)?;
        let dw = local_derivative(|s| parabolic_weiss(u, s, h, rule), t, FD_REL_STEP * t)?;
        let pp = rule.integrate(t, |x| {
            let mut g = [0.0f64; 32];
            let g = &mut g[..dim];
            u.gradient(x, t, g);
            let xg: f64 = x.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
            (xg + 2.0 * t * u.dt(x, t) - h * u.value(x, t)).powi(2)
        })?;
        values.push(w);
        slack.push(dw - delta / (2.0 * t) * w - pp / (2.0 * t.powf(h + 1.0)));
    }
    Ok(ParabolicWeissCheck {
        trace: FrequencyTrace::new(TraceParam::T, times.to_vec(), values)?,
        inequality: SlackReport::new(times.to_vec(), slack),
    })
}
