use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("value overflows f64: ln|x| = {0}")]
    Overflow(f64),
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    NonConvergence { a: f64, b: f64, estimate: f64 },
    #[error("degenerate case: {0}")]
    Degenerate(String),
    #[error("unsupported symbol: {0}")]
    UnsupportedSymbol(String),
    #[error("empty spectral window [{lo}, {hi}]")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("dimension {0} too large for this path")]
    DimensionTooLarge(usize),
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("grid error: {0}")]
    Grid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
