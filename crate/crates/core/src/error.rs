use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("linear solver: {0}")]
    Solver(String),

    #[error("extrapolation did not converge: {0}")]
    Convergence(String),

    #[error("basis: {0}")]
    Basis(String),

    #[error("check `{name}` failed: {detail}")]
    Check { name: String, detail: String },

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
