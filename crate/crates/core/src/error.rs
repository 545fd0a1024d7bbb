use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite input: {0}")]
    NonFinite(f64),

    #[error("quadrature did not converge (error estimate {estimate:e})")]
    Quadrature { estimate: f64 },

    #[error("AR polynomial has a root within {margin:e} of the unit circle (|z| = {modulus})")]
    UnitCircleRoot { modulus: f64, margin: f64 },

    #[error("root finder did not converge after {iterations} iterations")]
    RootFinder { iterations: usize },

    #[error("Laurent expansion needs more than {cap} coefficients")]
    NonConvergent { cap: usize },

    #[error("burn-in {burn} is shorter than the Laurent truncation {truncation}")]
    BurnTooShort { burn: usize, truncation: usize },

    #[error("series too short: need at least {needed} values, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("trimmed residuals have zero variance")]
    DegenerateVariance,

    #[error("Toeplitz recursion is singular at lag {lag}")]
    SingularToeplitz { lag: usize },

    #[error("autocorrelation matrix is not positive definite (lag {lag})")]
    NotPositiveDefinite { lag: usize },

    #[error("every random start was rejected")]
    NoValidStart,

    #[error("I/O error: {0}")]
    Io(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
