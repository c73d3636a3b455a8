//! Special-function constants: Γ in log space, fractional sphere areas, the
//! weight normalisation γ_a, the mixing constant M, the Gaussian constants
//! 𝒞ₙ and 𝒞, the bridge constant C̄, weighted half-sphere masses and the
//! epiperimetric constant κ₀.
//!
//! Everything that involves Γ at arguments of order `d·n/2` is evaluated in
//! log space so that `n` up to 10⁶ stays finite.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Degeneracy exponent `a ∈ (-1, 1)` of the weight `|y₀|ᵃ`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct WeightParam(f64);

impl WeightParam {
    pub fn new(a: f64) -> Result<Self> {
        if a.is_finite() && a > -1.0 && a < 1.0 {
            Ok(WeightParam(a))
        } else {
            domain(format!("weight exponent a = {a} outside (-1, 1)"))
        }
    }

    /// From the fractional order `s ∈ (0,1)` via `a = 1 - 2s`.
    pub fn from_order(s: f64) -> Result<Self> {
        Self::new(1.0 - 2.0 * s)
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    pub fn order(self) -> f64 {
        (1.0 - self.0) / 2.0
    }
}

impl TryFrom<f64> for WeightParam {
    type Error = crate::error::Error;
    fn try_from(a: f64) -> Result<Self> {
        WeightParam::new(a)
    }
}

impl From<WeightParam> for f64 {
    fn from(w: WeightParam) -> f64 {
        w.0
    }
}

/// Base dimension `d` and replication count `n`; the lifted elliptic
/// dimension is `N = d·n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DimensionSpec {
    pub d: usize,
    pub n: usize,
}

impl DimensionSpec {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 || n == 0 {
            return domain(format!("dimensions must be positive (d = {d}, n = {n})"));
        }
        Ok(DimensionSpec { d, n })
    }

    /// `N = d·n`, the tangential dimension of the lifted half-space.
    #[inline]
    pub fn lifted(&self) -> usize {
        self.d * self.n
    }

    /// Exponent `(dn - d - 2)/2` of the compact kernel 𝒢ₙ.
    pub fn gn_exponent(&self) -> f64 {
        (self.lifted() as f64 - self.d as f64 - 2.0) / 2.0
    }

    /// 𝒢ₙ is a genuine density only when `dn - d - 1 > 0`.
    pub fn check_density(&self) -> Result<()> {
        if self.d * (self.n - 1) < 1 {
            return domain(format!("n = {} too small for d = {}: the projected measure is singular", self.n, self.d));
        }
        Ok(())
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn ln_gamma_lanczos(x: f64) -> f64 {
    // valid for x >= 0.5
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma needs a positive finite argument, got {x}"));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        (PI / (PI * x).sin()).ln() - ln_gamma_lanczos(1.0 - x)
    } else if x < 1.5 {
        // Γ(x) = Γ(x+1)/x avoids cancellation near the zeros at 1 and 2
        ln_gamma_lanczos(x + 1.0) - x.ln()
    } else {
        ln_gamma_lanczos(x)
    }
}

/// Γ(x) for moderate positive arguments.
pub fn gamma(x: f64) -> Result<f64> {
    log_gamma(x).map(f64::exp)
}

/// `ln ω_k` where `ω_k = 2π^{(k+1)/2} / Γ((k+1)/2)` is the area of the unit
/// k-sphere, continued to real `k > -1`.
pub fn log_sphere_area(k: f64) -> Result<f64> {
    if !(k > -1.0) {
        return domain(format!("sphere index must exceed -1, got {k}"));
    }
    let h = (k + 1.0) / 2.0;
    Ok(2f64.ln() + h * PI.ln() - ln_gamma_unchecked(h))
}

/// Area of the unit k-sphere `𝕊ᵏ ⊂ ℝᵏ⁺¹` (real `k` allowed).
pub fn sphere_area(k: f64) -> Result<f64> {
    log_sphere_area(k).map(f64::exp)
}

/// `γ_a = π^{(1+a)/2} / Γ((1+a)/2)`.
pub fn gamma_a(a: WeightParam) -> f64 {
    let h = (1.0 + a.get()) / 2.0;
    (h * PI.ln() - ln_gamma_unchecked(h)).exp()
}

/// `M(d, n, a) = 2(dn + 1 + a)/n = 2d + 2(1 + a)/n`.
pub fn mixing_m(dims: DimensionSpec, a: WeightParam) -> f64 {
    2.0 * dims.d as f64 + 2.0 * (1.0 + a.get()) / dims.n as f64
}

/// `ln 𝒞ₙ` and `ln 𝒞`.
pub fn log_gaussian_constants(dims: DimensionSpec, a: WeightParam) -> Result<(f64, f64)> {
    dims.check_density()?;
    let (d, n, av) = (dims.d as f64, dims.n as f64, a.get());
    let m = mixing_m(dims, a);
    let ln_cn = 2f64.ln() + gamma_a(a).ln() + log_sphere_area(d * n - d - 1.0)?
        - log_sphere_area(d * n + av)?
        - (d + 1.0 + av) / 2.0 * (m * n).ln();
    Ok((ln_cn, log_gaussian_limit_constant(d as usize, a)))
}

/// `ln 𝒞 = -(d/2) ln 4π - a ln 2 - ln Γ((1+a)/2)`.
pub fn log_gaussian_limit_constant(d: usize, a: WeightParam) -> f64 {
    -(d as f64) / 2.0 * (4.0 * PI).ln() - a.get() * 2f64.ln() - ln_gamma_unchecked((1.0 + a.get()) / 2.0)
}

/// `(𝒞ₙ, 𝒞)` normalising 𝒢ₙ and 𝒢.
pub fn gaussian_constants(dims: DimensionSpec, a: WeightParam) -> Result<(f64, f64)> {
    let (ln_cn, ln_c) = log_gaussian_constants(dims, a)?;
    Ok((ln_cn.exp(), ln_c.exp()))
}

/// `ln C̄` with `C̄ = ω_{dn+a} M^{(dn+a)/2} / (2γ_a)`.
pub fn log_bridge_constant(dims: DimensionSpec, a: WeightParam) -> Result<f64> {
    let big_n = dims.lifted() as f64 + a.get();
    Ok(log_sphere_area(big_n)? + big_n / 2.0 * mixing_m(dims, a).ln() - (2.0 * gamma_a(a)).ln())
}

pub fn bridge_constant(dims: DimensionSpec, a: WeightParam) -> Result<f64> {
    log_bridge_constant(dims, a).map(f64::exp)
}

/// `ln |ℍᴺ_r|_a` with `|ℍᴺ_r|_a = ω_{N+a} r^{N+a} / (2γ_a)`.
pub fn log_weighted_half_sphere_measure(big_n: f64, r: f64, a: WeightParam) -> Result<f64> {
    if !(r > 0.0) {
        return domain(format!("radius must be positive, got {r}"));
    }
    let k = big_n + a.get();
    Ok(log_sphere_area(k)? + k * r.ln() - (2.0 * gamma_a(a)).ln())
}

/// Weighted mass `∫_{ℍᴺ_r} y₀ᵃ dη`.
pub fn weighted_half_sphere_measure(big_n: f64, r: f64, a: WeightParam) -> Result<f64> {
    log_weighted_half_sphere_measure(big_n, r, a).map(f64::exp)
}

/// Weighted half-ball volume `∫_{𝔻ᴺ⁺¹_r} y₀ᵃ dY`.
pub fn weighted_half_ball_volume(big_n: f64, r: f64, a: WeightParam) -> Result<f64> {
    Ok(weighted_half_sphere_measure(big_n, r, a)? * r / (big_n + 1.0 + a.get()))
}

/// `κ₀ = (1 + ⌊h⌋ - h) / (N + a + h + ⌊h⌋)`.
pub fn epi_kappa0(h: f64, big_n: usize, a: WeightParam) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return domain(format!("homogeneity must be positive, got {h}"));
    }
    let fl = h.floor();
    Ok((1.0 + fl - h) / (big_n as f64 + a.get() + h + fl))
}
