use num_complex::Complex64;
use thiserror::Error;

/// Errors shared by every module of the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no convergence after {iterations} iterations (seed {seed}, last iterate {last}, residual {residual:.3e})")]
    NoConvergence {
        seed: Complex64,
        last: Complex64,
        residual: f64,
        iterations: usize,
    },

    #[error("ambiguous winding count {value:.6} at {center} (defect {defect:.3}); try a smaller radius or more nodes")]
    AmbiguousCount {
        center: Complex64,
        value: f64,
        defect: f64,
    },

    #[error("degenerate zero at {lambda}: |T^({order})(lambda)| = {magnitude:.3e} is below the recursion floor")]
    DegenerateZero {
        lambda: Complex64,
        order: usize,
        magnitude: f64,
    },

    #[error("unsupported multiplicity {0} (kernel construction handles 1 and 2)")]
    UnsupportedMultiplicity(usize),

    #[error("inconsistent probe values at lambda {lambda} (spread {spread:.3e} > {allowed:.3e}): f is likely not mean-periodic for T")]
    InconsistentProbe {
        lambda: Complex64,
        spread: f64,
        allowed: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("range error: {0}")]
    Range(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
