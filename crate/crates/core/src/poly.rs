//! Sparse multivariate polynomials with `f64` coefficients.
//!
//! Variable 0 plays the role of the weighted coordinate `y₀` (or `x₀`)
//! wherever `L_a = Δ + (a/y₀)∂₀` is applied.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{domain, Result};
use crate::field::ScalarField;

const STACK_VARS: usize = 8;
const STACK_POW: usize = 16;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(into = "PolyRepr", try_from = "PolyRepr")]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct PolyRepr {
    nvars: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl From<Poly> for PolyRepr {
    fn from(p: Poly) -> Self {
        PolyRepr { nvars: p.nvars, terms: p.terms.into_iter().collect() }
    }
}

impl TryFrom<PolyRepr> for Poly {
    type Error = String;
    fn try_from(r: PolyRepr) -> std::result::Result<Self, String> {
        let mut p = Poly::zero(r.nvars);
        for (e, c) in r.terms {
            if e.len() != r.nvars {
                return Err(format!("term {e:?} does not have {} exponents", r.nvars));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn monomial(exps: Vec<u32>, c: f64) -> Self {
        let mut p = Poly::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// The coordinate `y_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        assert_eq!(exps.len(), self.nvars, "exponent vector length");
        if c == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, f64)> {
        self.terms.iter().map(|(k, v)| (k, *v))
    }

    pub fn coefficient(&self, exps: &[u32]) -> f64 {
        self.terms.get(exps).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Common total degree of all terms, if the polynomial is homogeneous.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn is_even_in(&self, var: usize) -> bool {
        self.terms.keys().all(|e| e[var] % 2 == 0)
    }

    pub fn scale(&self, c: f64) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (e, v) in self.terms() {
            p.add_term(e.clone(), c * v);
        }
        p
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut p = self.clone();
        for (e, v) in other.terms() {
            p.add_term(e.clone(), v);
        }
        p
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut p = Poly::zero(self.nvars);
        for (e1, v1) in self.terms() {
            for (e2, v2) in other.terms() {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, v1 * v2);
            }
        }
        p
    }

    /// Re-embed into `nvars` variables, placing variable `k` at `map[k]`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Poly {
        let mut p = Poly::zero(nvars);
        for (e, v) in self.terms() {
            let mut ne = vec![0; nvars];
            for (k, &x) in e.iter().enumerate() {
                ne[map[k]] += x;
            }
            p.add_term(ne, v);
        }
        p
    }

    pub fn partial(&self, i: usize) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (e, v) in self.terms() {
            if e[i] > 0 {
                let mut ne = e.clone();
                ne[i] -= 1;
                p.add_term(ne, v * e[i] as f64);
            }
        }
        p
    }

    /// Laplacian in the variables `vars`.
    pub fn laplacian_in(&self, vars: std::ops::Range<usize>) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for i in vars {
            p = p.add(&self.partial(i).partial(i));
        }
        p
    }

    /// `L_a P = Σ_{i<nspace} ∂ᵢ²P + (a/y₀)∂₀P`. Fails if a term linear in
    /// `y₀` would produce `y₀⁻¹` (only allowed when `a = 0`).
    pub fn weighted_laplacian(&self, a: f64, nspace: usize) -> Result<Poly> {
        let mut p = self.laplacian_in(1..nspace);
        for (e, v) in self.terms() {
            let k = e[0];
            if k == 1 && a != 0.0 {
                return domain("L_a of a term linear in y0 is not polynomial");
            }
            if k >= 2 {
                let mut ne = e.clone();
                ne[0] -= 2;
                p.add_term(ne, v * k as f64 * (k as f64 - 1.0 + a));
            }
        }
        Ok(p)
    }

    fn max_exps(&self) -> Vec<u32> {
        let mut m = vec![0u32; self.nvars];
        for e in self.terms.keys() {
            for (mi, &ei) in m.iter_mut().zip(e) {
                *mi = (*mi).max(ei);
            }
        }
        m
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        debug_assert!(y.len() >= self.nvars);
        self.terms().map(|(e, v)| v * e.iter().zip(y).map(|(&k, &x)| x.powi(k as i32)).product::<f64>()).sum()
    }

    /// Value and gradient in one pass.
    pub fn eval_with_gradient(&self, y: &[f64], g: &mut [f64]) -> f64 {
        let nv = self.nvars;
        if nv <= STACK_VARS && self.degree().unwrap_or(0) < STACK_POW as u32 {
            let mut pow = [[1.0f64; STACK_POW]; STACK_VARS];
            for (row, &x) in pow.iter_mut().zip(y).take(nv) {
                for k in 1..STACK_POW {
                    row[k] = row[k - 1] * x;
                }
            }
            return self.eval_with_table(&pow[..nv], g);
        }
        let maxe = self.max_exps();
        let pow: Vec<Vec<f64>> = (0..nv)
            .map(|i| {
                let mut v = vec![1.0; maxe[i] as usize + 1];
                for k in 1..v.len() {
                    v[k] = v[k - 1] * y[i];
                }
                v
            })
            .collect();
        self.eval_with_table(&pow, g)
    }

    /// `pow[i][k] = y_i^k`.
    fn eval_with_table<P: AsRef<[f64]>>(&self, pow: &[P], g: &mut [f64]) -> f64 {
        let nv = self.nvars;
        g[..nv].iter_mut().for_each(|x| *x = 0.0);
        let mut val = 0.0;
        for (e, c) in self.terms() {
            let mut prod = c;
            for i in 0..nv {
                prod *= pow[i].as_ref()[e[i] as usize];
            }
            val += prod;
            for i in 0..nv {
                if e[i] == 0 {
                    continue;
                }
                let mut d = c * e[i] as f64 * pow[i].as_ref()[e[i] as usize - 1];
                for k in 0..nv {
                    if k != i {
                        d *= pow[k].as_ref()[e[k] as usize];
                    }
                }
                g[i] += d;
            }
        }
        val
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Drop coefficients below `tol` in absolute value.
    pub fn pruned(&self, tol: f64) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (e, v) in self.terms() {
            if v.abs() > tol {
                p.add_term(e.clone(), v);
            }
        }
        p
    }
}

impl ScalarField for Poly {
    fn dim(&self) -> usize {
        self.nvars
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.eval(y)
    }
    fn gradient(&self, y: &[f64], g: &mut [f64]) {
        self.eval_with_gradient(y, g);
    }
    fn value_and_gradient(&self, y: &[f64], g: &mut [f64]) -> f64 {
        self.eval_with_gradient(y, g)
    }
    fn grad_norm2(&self, y: &[f64]) -> f64 {
        if self.nvars > STACK_VARS {
            let mut g = vec![0.0; self.nvars];
            self.eval_with_gradient(y, &mut g);
            return g.iter().map(|v| v * v).sum();
        }
        let mut g = [0.0; STACK_VARS];
        self.eval_with_gradient(y, &mut g);
        g.iter().map(|v| v * v).sum()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, v) in self.terms.iter().rev() {
            if !first {
                write!(f, " {} ", if *v < 0.0 { '-' } else { '+' })?;
                write!(f, "{}", v.abs())?;
            } else {
                write!(f, "{v}")?;
            }
            first = false;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*y{i}")?,
                    _ => write!(f, "*y{i}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

/// All exponent vectors of total degree `deg` in `nvars` variables, in
/// graded-lexicographic order (largest power of the first variable first).
pub fn monomials_of_degree(nvars: usize, deg: u32) -> Vec<Vec<u32>> {
    fn rec(nvars: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == nvars {
            prefix.push(deg);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=deg).rev() {
            prefix.push(k);
            rec(nvars, deg - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        return out;
    }
    rec(nvars, deg, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_eval() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let p = x.mul(&x).add(&y.scale(3.0)).sub(&Poly::constant(2, 1.0));
        assert_eq!(p.eval(&[2.0, 1.0]), 6.0);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.homogeneous_degree(), None);
        assert!(x.sub(&x).is_zero());
        let mut g = [0.0; 2];
        let v = p.eval_with_gradient(&[2.0, 5.0], &mut g);
        assert_eq!(v, 18.0);
        assert_eq!(g, [4.0, 3.0]);
    }

    #[test]
    fn weighted_laplacian_on_powers() {
        // L_a y₀^{2m} = 2m(2m-1+a) y₀^{2m-2}
        let a = 0.3;
        for m in 1..5u32 {
            let p = Poly::monomial(vec![2 * m, 0], 1.0);
            let l = p.weighted_laplacian(a, 2).unwrap();
            let c = 2.0 * m as f64 * (2.0 * m as f64 - 1.0 + a);
            assert!((l.coefficient(&[2 * m - 2, 0]) - c).abs() < 1e-14);
        }
        assert!(Poly::var(2, 0).weighted_laplacian(0.5, 2).is_err());
        assert!(Poly::var(2, 0).weighted_laplacian(0.0, 2).unwrap().is_zero());
    }

    #[test]
    fn monomial_enumeration() {
        let m = monomials_of_degree(3, 2);
        assert_eq!(m.len(), 6);
        assert_eq!(m[0], vec![2, 0, 0]);
        assert_eq!(m[5], vec![0, 0, 2]);
        assert_eq!(monomials_of_degree(4, 3).len(), 20);
    }

    #[test]
    fn embed_moves_variables() {
        let p = Poly::monomial(vec![2, 1], 3.0);
        let q = p.embed(3, &[0, 2]);
        assert_eq!(q.coefficient(&[2, 0, 1]), 3.0);
    }

    proptest::proptest! {
        #[test]
        fn gradient_matches_partials(c in proptest::collection::vec(-2.0f64..2.0, 6), y in proptest::collection::vec(-1.5f64..1.5, 3)) {
            let mut p = Poly::zero(3);
            let exps = [[2,1,0],[0,3,1],[1,1,1],[0,0,2],[4,0,0],[0,0,0]];
            for (e, &ci) in exps.iter().zip(&c) {
                p.add_term(e.to_vec(), ci);
            }
            let mut g = [0.0; 3];
            let v = p.eval_with_gradient(&y, &mut g);
            proptest::prop_assert!((v - p.eval(&y)).abs() < 1e-12);
            for i in 0..3 {
                proptest::prop_assert!((g[i] - p.partial(i).eval(&y)).abs() < 1e-11);
            }
        }
    }
}
