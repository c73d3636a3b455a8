//! Degenerate PDE machinery.

pub mod convergence;
pub mod elliptic;
pub mod grid;
pub mod modes;
pub mod parabolic;
pub mod poincare;
pub mod poisson;
pub mod solutions;
pub mod stencil;

pub use elliptic::*;
pub use grid::*;
pub use modes::*;
pub use parabolic::*;
pub use poincare::*;
pub use poisson::*;
pub use solutions::*;
pub use stencil::{FvOperator, SolveStats, SolverOptions};
