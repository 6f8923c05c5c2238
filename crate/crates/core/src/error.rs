use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duschinsky matrix is not orthogonal (max |U^T U - I| = {max_deviation:.3e})")]
    NotOrthogonal { max_deviation: f64 },

    #[error("J^T is numerically singular (condition number {condition:.3e})")]
    SingularJ { condition: f64 },

    #[error("invalid frequency {value} for mode {mode}: must be finite and positive")]
    InvalidFrequency { mode: usize, value: f64 },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("covariance matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("mean vector is not real-displaced: entries {mode} and N+{mode} differ")]
    ComplexMean { mode: usize },

    #[error("sigma + I/2 is not positive definite")]
    SingularSigmaQ,

    #[error("bad mode selection: {0}")]
    BadModeIndex(String),

    #[error("loop hafnian needs an even dimension, got {0}")]
    OddDimension(usize),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("pattern needs a {dim}x{dim} loop hafnian, budget is {budget}")]
    PatternTooLarge { dim: usize, budget: usize },

    #[error("probability {0:.3e} is negative beyond round-off")]
    NegativeProbability(f64),

    #[error("{what} of size {size} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("photon pattern has {found} modes, expected {expected}")]
    PatternLength { expected: usize, found: usize },

    #[error("photon count {count} in mode {mode} is outside 0..{cutoff}")]
    PatternOutOfRange {
        mode: usize,
        count: usize,
        cutoff: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid marginal table: {0}")]
    InvalidMarginal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
