//! Closed-form solutions and subsolutions of the backward degenerate equation
//! `∂ₜU + x₀^{-a} div(x₀ᵃ∇U) = 0`, used as oracles throughout.

use serde::{Deserialize, Serialize};

use crate::constants::WeightParam;
use crate::error::{domain, Result};
use crate::field::SpaceTimeField;
use crate::poly::Poly;

/// Boundary behaviour on the thin set `{x₀ = 0}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryType {
    /// `∂ᵥᵃU = 0`.
    TypeI,
    /// `U = 0` and `∇ₓU = 0`.
    TypeII,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Tagged union of analytic oracles. Polynomials are in the variables
/// `(x₀, x₁, …, x_d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ClosedFormSolution {
    Constant(f64),
    /// `xᵢ`, `i ≥ 1` (`x₀` only when `a = 0`).
    Coordinate(usize),
    /// `|X|² - 2(d+1+a)t`.
    CaloricQuadratic,
    /// A time-independent a-harmonic polynomial.
    StaticMode(Poly),
    /// The caloric polynomial `Σ_k (-t)ᵏ L_aᵏP / k!` generated by `P`.
    CaloricPoly(Poly),
    /// `(x₁)^±`; a subsolution only.
    HalfPlanePart(Sign),
    /// `x₀^{1-a}` times `xᵢ` (or 1); vanishes on the thin set.
    ThinVanishing(Option<usize>),
    LinearCombination(Vec<(f64, ClosedFormSolution)>),
}

/// A polynomial in `(X, t)` with its derivative polynomials precomputed.
#[derive(Clone, Debug)]
struct SpaceTimePoly {
    u: Poly,
    grad: Vec<Poly>,
    dt: Poly,
    dt_grad: Vec<Poly>,
    dtt: Poly,
    lap: Poly,
}

impl SpaceTimePoly {
    fn new(u: Poly, d: usize, a: f64) -> Result<Self> {
        let ti = d + 1;
        let grad = (0..=d).map(|i| u.partial(i)).collect();
        let dt = u.partial(ti);
        let dt_grad = (0..=d).map(|i| dt.partial(i)).collect();
        let dtt = dt.partial(ti);
        let lap = u.weighted_laplacian(a, d + 1)?;
        Ok(SpaceTimePoly { u, grad, dt, dt_grad, dtt, lap })
    }
}

#[derive(Clone, Debug)]
enum Piece {
    Poly(Box<SpaceTimePoly>),
    HalfPlane(f64),
    Thin(Option<usize>),
}

/// A [`ClosedFormSolution`] bound to `(d, a)` and ready to evaluate.
#[derive(Clone, Debug)]
pub struct ClosedForm {
    pub spec: ClosedFormSolution,
    pub d: usize,
    pub a: WeightParam,
    pieces: Vec<(f64, Piece)>,
}

fn caloric_from_seed(p: &Poly, d: usize, a: f64) -> Result<Poly> {
    // seed lives in (x₀..x_d); result in (x₀..x_d, t)
    let nv = d + 2;
    let map: Vec<usize> = (0..=d).collect();
    let mut lk = p.clone();
    let mut out = Poly::zero(nv);
    let mut fact = 1.0;
    let mut k = 0u32;
    while !lk.is_zero() {
        let mut tpow = vec![0; nv];
        tpow[d + 1] = k;
        let term = lk.embed(nv, &map).mul(&Poly::monomial(tpow, 1.0)).scale((-1f64).powi(k as i32) / fact);
        out = out.add(&term);
        lk = lk.weighted_laplacian(a, d + 1)?;
        k += 1;
        fact *= k as f64;
        if k > 64 {
            return domain("caloric seed does not terminate");
        }
    }
    Ok(out)
}

impl ClosedForm {
    pub fn new(spec: ClosedFormSolution, d: usize, a: WeightParam) -> Result<Self> {
        if d == 0 {
            return domain("spatial dimension must be positive");
        }
        let mut poly = Poly::zero(d + 2);
        let mut others = Vec::new();
        Self::collect(&spec, 1.0, d, a, &mut poly, &mut others)?;
        let mut pieces = Vec::new();
        if !poly.is_zero() {
            pieces.push((1.0, Piece::Poly(Box::new(SpaceTimePoly::new(poly, d, a.get())?))));
        }
        pieces.extend(others);
        Ok(ClosedForm { spec, d, a, pieces })
    }

    fn collect(
        spec: &ClosedFormSolution,
        c: f64,
        d: usize,
        a: WeightParam,
        poly: &mut Poly,
        others: &mut Vec<(f64, Piece)>,
    ) -> Result<()> {
        let nv = d + 2;
        let space_map: Vec<usize> = (0..=d).collect();
        match spec {
            ClosedFormSolution::Constant(v) => *poly = poly.add(&Poly::constant(nv, c * v)),
            ClosedFormSolution::Coordinate(i) => {
                if *i > d {
                    return domain(format!("coordinate x{i} out of range for d = {d}"));
                }
                if *i == 0 && a.get() != 0.0 {
                    return domain("x0 solves the weighted equation only for a = 0");
                }
                *poly = poly.add(&Poly::var(nv, *i).scale(c));
            }
            ClosedFormSolution::CaloricQuadratic => {
                let mut q = Poly::zero(nv);
                for i in 0..=d {
                    let mut e = vec![0; nv];
                    e[i] = 2;
                    q.add_term(e, 1.0);
                }
                let mut e = vec![0; nv];
                e[d + 1] = 1;
                q.add_term(e, -2.0 * (d as f64 + 1.0 + a.get()));
                *poly = poly.add(&q.scale(c));
            }
            ClosedFormSolution::StaticMode(p) => {
                if p.nvars() != d + 1 {
                    return domain(format!("static mode has {} variables, expected {}", p.nvars(), d + 1));
                }
                let lap = p.weighted_laplacian(a.get(), d + 1)?;
                let tol = 1e-10 * p.max_abs_coefficient().max(1.0);
                if lap.max_abs_coefficient() > tol {
                    return domain("static mode is not a-harmonic");
                }
                *poly = poly.add(&p.embed(nv, &space_map).scale(c));
            }
            ClosedFormSolution::CaloricPoly(p) => {
                if p.nvars() != d + 1 {
                    return domain(format!("caloric seed has {} variables, expected {}", p.nvars(), d + 1));
                }
                if a.get() != 0.0 && !p.is_even_in(0) {
                    return domain("caloric seed must be even in x0");
                }
                *poly = poly.add(&caloric_from_seed(p, d, a.get())?.scale(c));
            }
            ClosedFormSolution::HalfPlanePart(s) => others.push((c, Piece::HalfPlane(s.factor()))),
            ClosedFormSolution::ThinVanishing(i) => {
                if let Some(i) = i {
                    if *i == 0 || *i > d {
                        return domain(format!("thin-vanishing factor x{i} out of range"));
                    }
                }
                others.push((c, Piece::Thin(*i)));
            }
            ClosedFormSolution::LinearCombination(terms) => {
                for (ci, s) in terms {
                    Self::collect(s, c * ci, d, a, poly, others)?;
                }
            }
        }
        Ok(())
    }

    /// True when some part is only a subsolution (the half-plane parts).
    pub fn is_subsolution_only(&self) -> bool {
        self.pieces.iter().any(|(_, p)| matches!(p, Piece::HalfPlane(_)))
    }

    /// Boundary condition satisfied on the thin set, if uniform.
    pub fn boundary_type(&self) -> Option<BoundaryType> {
        let mut ty = None;
        for (_, p) in &self.pieces {
            let this = match p {
                Piece::Poly(sp) => {
                    if sp.u.is_even_in(0) {
                        BoundaryType::TypeI
                    } else {
                        return None;
                    }
                }
                Piece::HalfPlane(_) => BoundaryType::TypeI,
                Piece::Thin(_) => BoundaryType::TypeII,
            };
            match ty {
                None => ty = Some(this),
                Some(t) if t != this => return None,
                _ => {}
            }
        }
        ty.or(Some(BoundaryType::TypeI))
    }

    /// The space-time polynomial part, if the solution is purely polynomial.
    pub fn as_polynomial(&self) -> Option<&Poly> {
        match self.pieces.as_slice() {
            [(_, Piece::Poly(sp))] => Some(&sp.u),
            [] => None,
            _ => None,
        }
    }

    fn with_point<R>(&self, x: &[f64], t: f64, f: impl FnOnce(&[f64]) -> R) -> R {
        let mut buf = [0.0f64; 8];
        let n = self.d + 2;
        if n <= 8 {
            buf[..n - 1].copy_from_slice(&x[..n - 1]);
            buf[n - 1] = t;
            f(&buf[..n])
        } else {
            let mut v = x[..n - 1].to_vec();
            v.push(t);
            f(&v)
        }
    }
}

impl SpaceTimeField for ClosedForm {
    fn space_dim(&self) -> usize {
        self.d + 1
    }

    fn value(&self, x: &[f64], t: f64) -> f64 {
        let av = self.a.get();
        self.pieces
            .iter()
            .map(|(c, p)| {
                c * match p {
                    Piece::Poly(sp) => self.with_point(x, t, |z| sp.u.eval(z)),
                    Piece::HalfPlane(s) => (s * x[1]).max(0.0),
                    Piece::Thin(i) => x[0].powf(1.0 - av) * i.map_or(1.0, |i| x[i]),
                }
            })
            .sum()
    }

    fn gradient(&self, x: &[f64], t: f64, g: &mut [f64]) {
        let n = self.d + 1;
        let av = self.a.get();
        g[..n].iter_mut().for_each(|v| *v = 0.0);
        for (c, p) in &self.pieces {
            match p {
                Piece::Poly(sp) => self.with_point(x, t, |z| {
                    for i in 0..n {
                        g[i] += c * sp.grad[i].eval(z);
                    }
                }),
                Piece::HalfPlane(s) => {
                    if s * x[1] > 0.0 {
                        g[1] += c * s;
                    }
                }
                Piece::Thin(i) => {
                    let f = i.map_or(1.0, |i| x[i]);
                    g[0] += c * (1.0 - av) * x[0].powf(-av) * f;
                    if let Some(i) = i {
                        g[*i] += c * x[0].powf(1.0 - av);
                    }
                }
            }
        }
    }

    fn dt(&self, x: &[f64], t: f64) -> f64 {
        self.pieces
            .iter()
            .map(|(c, p)| match p {
                Piece::Poly(sp) => c * self.with_point(x, t, |z| sp.dt.eval(z)),
                _ => 0.0,
            })
            .sum()
    }

    fn dt_gradient(&self, x: &[f64], t: f64, g: &mut [f64]) {
        let n = self.d + 1;
        g[..n].iter_mut().for_each(|v| *v = 0.0);
        for (c, p) in &self.pieces {
            if let Piece::Poly(sp) = p {
                self.with_point(x, t, |z| {
                    for i in 0..n {
                        g[i] += c * sp.dt_grad[i].eval(z);
                    }
                });
            }
        }
    }

    fn dtt(&self, x: &[f64], t: f64) -> f64 {
        self.pieces
            .iter()
            .map(|(c, p)| match p {
                Piece::Poly(sp) => c * self.with_point(x, t, |z| sp.dtt.eval(z)),
                _ => 0.0,
            })
            .sum()
    }

    fn weighted_laplacian(&self, x: &[f64], t: f64) -> f64 {
        self.pieces
            .iter()
            .map(|(c, p)| match p {
                Piece::Poly(sp) => c * self.with_point(x, t, |z| sp.lap.eval(z)),
                // zero away from the kink / thin set
                _ => 0.0,
            })
            .sum()
    }
}
