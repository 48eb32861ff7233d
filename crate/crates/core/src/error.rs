use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{0} has no closed-form transform; use radial_fourier_numeric")]
    NoClosedForm(String),

    #[error("quadrature did not converge: estimate {estimate:e} exceeds tolerance {tol:e}")]
    Accuracy { estimate: f64, tol: f64 },

    #[error("empty point set")]
    EmptyPointSet,

    #[error("points {0} and {1} coincide (zero separation)")]
    ZeroSeparation(usize, usize),

    #[error("point {index} lies outside the domain")]
    OutsideDomain { index: usize },

    #[error("tree with {boxes} boxes exceeds the cap of {cap}")]
    TreeTooDeep { boxes: usize, cap: usize },

    #[error("leaf level {leaf_level} is too shallow: {needed} or more required")]
    LevelUnderflow { leaf_level: usize, needed: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dense matrix of order {n} exceeds the cap of {cap}")]
    MemoryCap { n: usize, cap: usize },

    #[error("no convergence after {iterations} iterations (best relative residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular collocation matrix (condition estimate {0:e})")]
    Singular(f64),

    #[error("eigensolve failed: {0}")]
    Eigen(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
