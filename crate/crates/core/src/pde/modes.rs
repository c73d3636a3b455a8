//! Weakly a-harmonic homogeneous polynomials and the orthonormal sphere modes
//! built from them.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::constants::WeightParam;
use crate::error::{domain, Error, Result};
use crate::poly::{monomials_of_degree, Poly};
use crate::quad::{AngularOrders, HalfSphereRule};

/// A homogeneous polynomial in `(y₀, y₁…y_N)`, even in `y₀`, with `L_a P = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct AharmonicPolynomial {
    pub degree: u32,
    pub poly: Poly,
    pub a: WeightParam,
}

impl AharmonicPolynomial {
    pub fn big_n(&self) -> usize {
        self.poly.nvars() - 1
    }

    /// Pointwise `L_a P` (zero up to rounding).
    pub fn residual_at(&self, y: &[f64]) -> Result<f64> {
        Ok(self.poly.weighted_laplacian(self.a.get(), self.poly.nvars())?.eval(y))
    }
}

/// `P = Σ_m y₀^{2m} p_{2m}(y)` with `p₀ = q` and
/// `p_{k+2} = -Δ_y p_k / ((k+2)(k+1+a))`.
pub fn make_aharmonic_polynomial(q: &Poly, a: WeightParam) -> Result<AharmonicPolynomial> {
    let big_n = q.nvars();
    let degree = match q.homogeneous_degree() {
        Some(h) => h,
        None if q.is_zero() => return domain("seed polynomial is zero"),
        None => return domain("seed polynomial is not homogeneous"),
    };
    let map: Vec<usize> = (1..=big_n).collect();
    let mut pk = q.clone();
    let mut out = Poly::zero(big_n + 1);
    let mut k = 0u32;
    while !pk.is_zero() {
        let mut e = vec![0; big_n + 1];
        e[0] = k;
        out = out.add(&pk.embed(big_n + 1, &map).mul(&Poly::monomial(e, 1.0)));
        let lap = pk.laplacian_in(0..big_n);
        pk = lap.scale(-1.0 / ((k as f64 + 2.0) * (k as f64 + 1.0 + a.get())));
        k += 2;
    }
    Ok(AharmonicPolynomial { degree, poly: out, a })
}

#[derive(Clone, Debug, Serialize)]
pub struct Mode {
    pub degree: u32,
    pub poly: Poly,
}

/// Orthonormal system `{φ_j}` in `L²(𝕊ᴺ, |y₀|ᵃ)` of restrictions of even
/// a-harmonic homogeneous polynomials, grouped by degree.
#[derive(Clone, Debug, Serialize)]
pub struct ModeBasis {
    pub big_n: usize,
    pub a: WeightParam,
    pub max_degree: u32,
    pub modes: Vec<Mode>,
    #[serde(skip)]
    rule: Option<HalfSphereRule>,
}

/// Largest degree accepted by [`orthonormalize_modes`].
pub const MAX_MODE_DEGREE: u32 = 6;
const MAX_CONDITION: f64 = 1e8;

/// Full-sphere inner product of two even fields, as twice the half-sphere
/// integral.
fn sphere_inner(rule: &HalfSphereRule, f: &Poly, g: &Poly) -> Result<f64> {
    Ok(2.0 * rule.integrate(1.0, |y| f.eval(y) * g.eval(y))?)
}

pub fn orthonormalize_modes(max_degree: u32, big_n: usize, a: WeightParam, orders: AngularOrders) -> Result<ModeBasis> {
    if max_degree > MAX_MODE_DEGREE {
        return domain(format!("mode degree {max_degree} exceeds cap {MAX_MODE_DEGREE}"));
    }
    if big_n == 0 {
        return domain("mode basis needs N >= 1");
    }
    let rule = HalfSphereRule::new(big_n, a, orders)?;
    let mut modes = Vec::new();
    for h in 0..=max_degree {
        let seeds: Vec<Poly> = monomials_of_degree(big_n, h)
            .into_iter()
            .map(|e| make_aharmonic_polynomial(&Poly::monomial(e, 1.0), a).map(|p| p.poly))
            .collect::<Result<_>>()?;
        let k = seeds.len();
        let mut g = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let v = sphere_inner(&rule, &seeds[i], &seeds[j])?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(g.clone());
        let (lo, hi) = eig.eigenvalues.iter().fold((f64::INFINITY, 0f64), |(l, u), &e| (l.min(e), u.max(e)));
        if !(lo > 0.0) || hi / lo > MAX_CONDITION {
            return Err(Error::Basis(format!("Gram matrix of degree-{h} seeds has condition number {:e}", hi / lo)));
        }
        let chol =
            g.cholesky().ok_or_else(|| Error::Basis(format!("Gram matrix of degree {h} not positive definite")))?;
        let linv =
            chol.l().try_inverse().ok_or_else(|| Error::Basis(format!("singular Cholesky factor at degree {h}")))?;
        for i in 0..k {
            let mut p = Poly::zero(big_n + 1);
            for (j, s) in seeds.iter().enumerate().take(i + 1) {
                p = p.add(&s.scale(linv[(i, j)]));
            }
            modes.push(Mode { degree: h, poly: p.pruned(1e-15 * linv.amax()) });
        }
    }
    Ok(ModeBasis { big_n, a, max_degree, modes, rule: Some(rule) })
}

impl ModeBasis {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn of_degree(&self, h: u32) -> impl Iterator<Item = (usize, &Mode)> {
        self.modes.iter().enumerate().filter(move |(_, m)| m.degree == h)
    }

    fn rule(&self) -> Result<&HalfSphereRule> {
        self.rule.as_ref().ok_or_else(|| Error::Basis("basis has no quadrature attached".into()))
    }

    /// Full Gram matrix `⟨φ_j, φ_k⟩`.
    pub fn gram(&self) -> Result<DMatrix<f64>> {
        let rule = self.rule()?;
        let k = self.len();
        let mut g = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let v = sphere_inner(rule, &self.modes[i].poly, &self.modes[j].poly)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// Linear combination `Σ c_j P_j` as a polynomial.
    pub fn combine(&self, coeffs: &[(usize, f64)]) -> Poly {
        let mut p = Poly::zero(self.big_n + 1);
        for &(j, c) in coeffs {
            p = p.add(&self.modes[j].poly.scale(c));
        }
        p
    }
}

/// `|∫_{𝕊ᴺ} (∇P_j·∇P_k - h_j h_k φ_j φ_k)|y₀|ᵃ - δ_{jk} h_j(N+a+h_j-1)|`.
/// On the unit sphere the integrand is the tangential gradient product.
pub fn check_mode_identity(basis: &ModeBasis, j: usize, k: usize) -> Result<f64> {
    if j >= basis.len() || k >= basis.len() {
        return domain(format!("mode index out of range ({j}, {k}) for {} modes", basis.len()));
    }
    let (pj, pk) = (&basis.modes[j], &basis.modes[k]);
    let (hj, hk) = (pj.degree as f64, pk.degree as f64);
    let dim = basis.big_n + 1;
    let rule = basis.rule()?;
    let val = 2.0
        * rule.integrate(1.0, |y| {
            let mut gj = [0.0f64; 16];
            let mut gk = [0.0f64; 16];
            let vj = pj.poly.eval_with_gradient(y, &mut gj[..dim]);
            let vk = pk.poly.eval_with_gradient(y, &mut gk[..dim]);
            let dot: f64 = gj[..dim].iter().zip(&gk[..dim]).map(|(a, b)| a * b).sum();
            dot - hj * hk * vj * vk
        })?;
    let target = if j == k { hj * (basis.big_n as f64 + basis.a.get() + hj - 1.0) } else { 0.0 };
    Ok((val - target).abs())
}
