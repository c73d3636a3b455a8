//! Weighted quadrature.

mod integrate;
mod rules;

pub(crate) use integrate::chunked_sum;
pub use integrate::*;
pub use rules::*;
