//! One-dimensional Gauss rules.
//!
//! Classical rules come from their three-term recurrences through
//! Golub–Welsch. Non-classical weights (the Freud half-line weight and the
//! truncated radial weights of the ball integrators) get their recurrence from
//! a discretized Stieltjes procedure on a fine composite discretization.

use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::ln_gamma_unchecked;
use crate::error::{domain, Error, Result};

/// Weight function attached to a rule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum WeightKind {
    /// `x^β (1-x)^α` on (0,1).
    Jacobi { alpha: f64, beta: f64 },
    /// `(1-x)^α (1+x)^β` on (-1,1).
    JacobiSymmetric { alpha: f64, beta: f64 },
    /// `xᵃ e^{-x²/4}` on (0,∞).
    Freud { a: f64 },
    /// `e^{-z²/4}` on ℝ.
    Hermite,
    /// `x^α e^{-x}` on (0,∞).
    Laguerre { alpha: f64 },
    /// `x^β (1-x²)^m` on (0,1).
    TruncatedRadial { beta: f64, m: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub weight: WeightKind,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    fn check(self) -> Result<Self> {
        if self.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Quadrature(format!("non-positive weight in {:?} rule", self.weight)));
        }
        if self.nodes.windows(2).any(|p| !(p[0] < p[1])) {
            return Err(Error::Quadrature(format!("nodes not strictly increasing in {:?} rule", self.weight)));
        }
        Ok(self)
    }
}

/// Eigenvalues and squared first eigenvector components of the symmetric
/// tridiagonal Jacobi matrix (diagonal `diag`, off-diagonal `sqrt(off²)`).
/// Implicit QL with Wilkinson shifts, tracking only the first row of the
/// eigenvector matrix.
fn golub_welsch(diag: &[f64], off: &[f64], mu0: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Quadrature("QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let nodes = idx.iter().map(|&i| d[i]).collect();
    let weights = idx.iter().map(|&i| mu0 * z[i] * z[i]).collect();
    Ok((nodes, weights))
}

/// Rule from monic recurrence coefficients `p_{k+1} = (x - α_k) p_k - β_k p_{k-1}`.
fn rule_from_recurrence(alpha: &[f64], beta: &[f64], mu0: f64, weight: WeightKind) -> Result<QuadRule> {
    let n = alpha.len();
    let off: Vec<f64> = (1..n).map(|k| beta[k].sqrt()).chain(std::iter::once(0.0)).collect();
    let (nodes, weights) = golub_welsch(alpha, &off, mu0)?;
    QuadRule { nodes, weights, weight }.check()
}

fn check_order(m: usize) -> Result<()> {
    if m == 0 {
        return domain("quadrature order must be at least 1");
    }
    Ok(())
}

/// Gauss–Jacobi on (-1,1) for `(1-x)^α (1+x)^β`.
pub fn gauss_jacobi_symmetric(m: usize, alpha: f64, beta: f64) -> Result<QuadRule> {
    check_order(m)?;
    if !(alpha > -1.0) || !(beta > -1.0) {
        return domain(format!("Jacobi exponents must exceed -1 (alpha = {alpha}, beta = {beta})"));
    }
    let ab = alpha + beta;
    let mut a = vec![0.0; m];
    let mut b = vec![0.0; m];
    for k in 0..m {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        a[k] = if k == 0 { (beta - alpha) / (ab + 2.0) } else { (beta * beta - alpha * alpha) / (s * (s + 2.0)) };
        b[k] = if k == 0 {
            0.0
        } else if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
    }
    let ln_mu0 = (ab + 1.0) * 2f64.ln() + ln_gamma_unchecked(alpha + 1.0) + ln_gamma_unchecked(beta + 1.0)
        - ln_gamma_unchecked(ab + 2.0);
    rule_from_recurrence(&a, &b, ln_mu0.exp(), WeightKind::JacobiSymmetric { alpha, beta })
}

/// Gauss–Jacobi on (0,1) for the weight `x^β (1-x)^α`.
pub fn gauss_jacobi(m: usize, alpha: f64, beta: f64) -> Result<QuadRule> {
    let sym = gauss_jacobi_symmetric(m, alpha, beta)?;
    let scale = 0.5f64.powf(alpha + beta + 1.0);
    let nodes = sym.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect();
    let weights = sym.weights.iter().map(|w| w * scale).collect();
    QuadRule { nodes, weights, weight: WeightKind::Jacobi { alpha, beta } }.check()
}

/// Gauss–Legendre on (lo, hi).
pub fn gauss_legendre_on(m: usize, lo: f64, hi: f64) -> Result<QuadRule> {
    let mut r = gauss_jacobi(m, 0.0, 0.0)?;
    let w = hi - lo;
    for x in r.nodes.iter_mut() {
        *x = lo + w * *x;
    }
    for v in r.weights.iter_mut() {
        *v *= w;
    }
    Ok(r)
}

/// Gauss–Hermite for the weight `e^{-z²/4}` on ℝ.
pub fn hermite_line(m: usize) -> Result<QuadRule> {
    check_order(m)?;
    let a = vec![0.0; m];
    let b: Vec<f64> = (0..m).map(|k| k as f64 / 2.0).collect();
    let base = rule_from_recurrence(&a, &b, PI.sqrt(), WeightKind::Hermite)?;
    // z = 2x maps e^{-x²} to e^{-z²/4}
    let mut nodes: Vec<f64> = base.nodes.iter().map(|x| 2.0 * x).collect();
    let mut weights: Vec<f64> = base.weights.iter().map(|w| 2.0 * w).collect();
    // exact symmetry: average mirrored pairs
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    QuadRule { nodes, weights, weight: WeightKind::Hermite }.check()
}

/// Generalized Gauss–Laguerre for `x^α e^{-x}` on (0,∞).
pub fn gauss_laguerre(m: usize, alpha: f64) -> Result<QuadRule> {
    check_order(m)?;
    if !(alpha > -1.0) {
        return domain(format!("Laguerre exponent must exceed -1, got {alpha}"));
    }
    let a: Vec<f64> = (0..m).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let b: Vec<f64> = (0..m).map(|k| k as f64 * (k as f64 + alpha)).collect();
    rule_from_recurrence(&a, &b, ln_gamma_unchecked(alpha + 1.0).exp(), WeightKind::Laguerre { alpha })
}

/// A panel of a composite discretization: its interval and whether the
/// left/right endpoint carries the singular factor.
struct Panel {
    lo: f64,
    hi: f64,
}

/// Discretize `(x-lo)^{le} (hi-x)^{re} s(x)` on `[lo, hi]` by composite Gauss
/// rules; the endpoint panels absorb the algebraic factors exactly.
fn discretize(
    breaks: &[f64],
    le: f64,
    re: f64,
    per_panel: usize,
    smooth: impl Fn(f64) -> f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (lo, hi) = (breaks[0], breaks[breaks.len() - 1]);
    let panels: Vec<Panel> = breaks.windows(2).map(|p| Panel { lo: p[0], hi: p[1] }).collect();
    let last = panels.len() - 1;
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for (i, p) in panels.iter().enumerate() {
        let width = p.hi - p.lo;
        let left = if i == 0 { le } else { 0.0 };
        let right = if i == last { re } else { 0.0 };
        let r = gauss_jacobi(per_panel, right, left)?;
        let scale = width.powf(1.0 + left + right);
        for (&u, &w) in r.nodes.iter().zip(&r.weights) {
            let x = p.lo + width * u;
            let mut mult = smooth(x);
            if i != 0 {
                mult *= (x - lo).powf(le);
            }
            if i != last {
                mult *= (hi - x).powf(re);
            }
            let wt = w * scale * mult;
            if wt > 0.0 {
                xs.push(x);
                ws.push(wt);
            }
        }
    }
    Ok((xs, ws))
}

/// Discretized Stieltjes procedure on a discrete measure; returns monic
/// recurrence coefficients (α_k, β_k), β_0 = total mass.
fn stieltjes(m: usize, xs: &[f64], ws: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mass: f64 = ws.iter().sum();
    let mut alpha = vec![0.0; m];
    let mut beta = vec![0.0; m];
    beta[0] = mass;
    let norm0 = mass.sqrt();
    let mut q_prev = vec![0.0; xs.len()];
    let mut q: Vec<f64> = vec![1.0 / norm0; xs.len()];
    for k in 0..m {
        alpha[k] = xs.iter().zip(ws).zip(&q).map(|((x, w), qi)| w * x * qi * qi).sum();
        if k + 1 == m {
            break;
        }
        let sb = if k == 0 { 0.0 } else { beta[k].sqrt() };
        let r: Vec<f64> = (0..xs.len()).map(|i| (xs[i] - alpha[k]) * q[i] - sb * q_prev[i]).collect();
        let nrm2: f64 = r.iter().zip(ws).map(|(ri, w)| w * ri * ri).sum();
        if !(nrm2 > 0.0) || !nrm2.is_finite() {
            return Err(Error::Quadrature(format!("recurrence lost positivity at order {}: beta = {nrm2:e}", k + 1)));
        }
        beta[k + 1] = nrm2;
        let nrm = nrm2.sqrt();
        q_prev = std::mem::replace(&mut q, r.into_iter().map(|v| v / nrm).collect());
    }
    Ok((alpha, beta))
}

/// Largest order accepted by [`freud_halfline`].
pub const FREUD_MAX_ORDER: usize = 40;

/// Gauss rule on (0,∞) for the weight `xᵃ e^{-x²/4}`.
pub fn freud_halfline(m: usize, a: f64) -> Result<QuadRule> {
    check_order(m)?;
    if !(a > -1.0) {
        return domain(format!("Freud exponent must exceed -1, got {a}"));
    }
    if m > FREUD_MAX_ORDER {
        return domain(format!("Freud rule order {m} exceeds cap {FREUD_MAX_ORDER}"));
    }
    // e^{-x²/4} < 1e-250 beyond x = 48
    let breaks: Vec<f64> = (0..=24).map(|k| 2.0 * k as f64).collect();
    let (xs, ws) = discretize(&breaks, a, 0.0, 48, |x| (-x * x / 4.0).exp())?;
    let (alpha, beta) = stieltjes(m, &xs, &ws)?;
    let mu0 = (a * 2f64.ln() + ln_gamma_unchecked((a + 1.0) / 2.0)).exp();
    rule_from_recurrence(&alpha, &beta, mu0, WeightKind::Freud { a })
}

/// Gauss rule on (0,1) for `x^β (1-x²)^m`; used for radial integrals over
/// balls where the Gaussian-like factor `(1-x²)^m` can be sharply peaked.
pub fn truncated_radial(order: usize, beta: f64, m: f64) -> Result<QuadRule> {
    check_order(order)?;
    if !(beta > -1.0) || !(m > -1.0) {
        return domain(format!("radial exponents must exceed -1 (beta = {beta}, m = {m})"));
    }
    if m == 0.0 {
        let mut r = gauss_jacobi(order, 0.0, beta)?;
        r.weight = WeightKind::TruncatedRadial { beta, m };
        return Ok(r);
    }
    let weight = WeightKind::TruncatedRadial { beta, m };
    // mass sits within a few multiples of 1/sqrt(m) of the origin
    let reach = (12.0 / (m.max(0.0) + 1.0).sqrt()).min(1.0);
    let panels = 24;
    let breaks: Vec<f64> = (0..=panels).map(|k| reach * k as f64 / panels as f64).collect();
    let (xs, ws) = if reach < 1.0 {
        discretize(&breaks, beta, 0.0, 40, |x| (m * (-x * x).ln_1p()).exp())?
    } else {
        discretize(&breaks, beta, m, 40, |x| (1.0 + x).powf(m))?
    };
    let (alpha, b) = stieltjes(order, &xs, &ws)?;
    let mu0 = 0.5
        * (ln_gamma_unchecked((beta + 1.0) / 2.0) + ln_gamma_unchecked(m + 1.0)
            - ln_gamma_unchecked((beta + 1.0) / 2.0 + m + 1.0))
        .exp();
    rule_from_recurrence(&alpha, &b, mu0, weight)
}
