//! Evaluator interfaces shared by the closed-form solutions, the lift and the
//! functionals.

/// A function on the (half-)space `ℝᴺ⁺¹` with coordinate 0 the weighted one.
pub trait ScalarField: Sync {
    /// Ambient dimension `N + 1`.
    fn dim(&self) -> usize;
    fn value(&self, y: &[f64]) -> f64;
    fn gradient(&self, y: &[f64], g: &mut [f64]);

    fn value_and_gradient(&self, y: &[f64], g: &mut [f64]) -> f64 {
        self.gradient(y, g);
        self.value(y)
    }

    fn grad_norm2(&self, y: &[f64]) -> f64 {
        let mut g = vec![0.0; self.dim()];
        self.gradient(y, &mut g);
        g.iter().map(|v| v * v).sum()
    }
}

/// A function `U(X, t)` on `ℝ^{d+1}_+ × (0,∞)` with the derivatives the
/// parabolic functionals and the lift need.
pub trait SpaceTimeField: Sync {
    /// `d + 1`.
    fn space_dim(&self) -> usize;
    fn value(&self, x: &[f64], t: f64) -> f64;
    /// Spatial gradient `∇U`.
    fn gradient(&self, x: &[f64], t: f64, g: &mut [f64]);
    fn dt(&self, x: &[f64], t: f64) -> f64;
    /// `∇(∂ₜU)`.
    fn dt_gradient(&self, x: &[f64], t: f64, g: &mut [f64]);
    fn dtt(&self, x: &[f64], t: f64) -> f64;
    /// `x₀^{-a} div(x₀ᵃ ∇U)`.
    fn weighted_laplacian(&self, x: &[f64], t: f64) -> f64;

    /// `J = (X, t)·∇_{(X,t)} ∂ₜU`.
    fn source_j(&self, x: &[f64], t: f64) -> f64 {
        let mut g = vec![0.0; self.space_dim()];
        self.dt_gradient(x, t, &mut g);
        x.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() + t * self.dtt(x, t)
    }

    /// Backward-equation residual `L_a U + ∂ₜU`.
    fn backward_residual(&self, x: &[f64], t: f64) -> f64 {
        self.weighted_laplacian(x, t) + self.dt(x, t)
    }
}

impl<T: ScalarField + ?Sized> ScalarField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, y: &[f64]) -> f64 {
        (**self).value(y)
    }
    fn gradient(&self, y: &[f64], g: &mut [f64]) {
        (**self).gradient(y, g)
    }
}

impl<T: SpaceTimeField + ?Sized> SpaceTimeField for &T {
    fn space_dim(&self) -> usize {
        (**self).space_dim()
    }
    fn value(&self, x: &[f64], t: f64) -> f64 {
        (**self).value(x, t)
    }
    fn gradient(&self, x: &[f64], t: f64, g: &mut [f64]) {
        (**self).gradient(x, t, g)
    }
    fn dt(&self, x: &[f64], t: f64) -> f64 {
        (**self).dt(x, t)
    }
    fn dt_gradient(&self, x: &[f64], t: f64, g: &mut [f64]) {
        (**self).dt_gradient(x, t, g)
    }
    fn dtt(&self, x: &[f64], t: f64) -> f64 {
        (**self).dtt(x, t)
    }
    fn weighted_laplacian(&self, x: &[f64], t: f64) -> f64 {
        (**self).weighted_laplacian(x, t)
    }
}
