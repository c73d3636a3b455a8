#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod constants;
pub mod error;
pub mod field;
pub mod functionals;
pub mod harness;
pub mod kernels;
pub mod lift;
pub mod measures;
pub mod pde;
pub mod poly;
pub mod quad;

pub use error::{Error, Result};
