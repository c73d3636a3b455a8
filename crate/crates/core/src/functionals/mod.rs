//! Frequency functionals (Almgren, Weiss, ACF) and the checks built on them.

pub mod acf;
pub mod almgren;
pub mod trace;
pub mod weiss;

pub use acf::*;
pub use almgren::*;
pub use trace::*;
pub use weiss::*;

use crate::error::{domain, Result};

/// Fourth-order central difference of `f` at `x` with step `eps`.
pub(crate) fn local_derivative(f: impl Fn(f64) -> Result<f64>, x: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || eps >= x {
        return domain(format!("finite-difference step {eps} invalid at {x}"));
    }
    let (m2, m1, p1, p2) = (f(x - 2.0 * eps)?, f(x - eps)?, f(x + eps)?, f(x + 2.0 * eps)?);
    Ok((m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * eps))
}

/// Relative step used by [`local_derivative`] callers.
pub(crate) const FD_REL_STEP: f64 = 1e-3;
