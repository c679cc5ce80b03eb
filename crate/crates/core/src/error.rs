use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not Hermitian (||M - M^dagger||_F = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("eigensolver did not converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("matrix is rank deficient (smallest singular value ratio {ratio:.3e})")]
    RankDeficient { ratio: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid dimension {0}: local dimension must be at least 2")]
    InvalidDimension(usize),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("state is not positive semidefinite (eigenvalue {eigenvalue:.6e})")]
    NotPositive { eigenvalue: f64 },

    #[error("trace is {0}, expected 1")]
    BadTrace(f64),

    #[error("expectation value has imaginary part {0:.3e}")]
    NonRealExpectation(f64),

    #[error("Born probabilities sum to {0}, expected 1")]
    ProbabilityMass(f64),

    #[error("objective decreased by {0:.3e} during power iteration")]
    Monotonicity(f64),

    #[error("linear system is singular: {0}")]
    Singular(String),

    #[error("confidence unreachable: exact expectation {0:.3e} is zero")]
    UnreachableConfidence(f64),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
