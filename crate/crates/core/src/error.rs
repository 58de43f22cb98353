use thiserror::Error;

/// Errors raised by the spectral pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} out of range: {value} (expected {expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("singular element jacobian at element ({0}, {1})")]
    SingularJacobian(usize, usize),

    #[error("factorization failed at pivot {pivot} (value {value:e}); matrix is not positive definite")]
    Factorization { pivot: usize, value: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (best residuals {residuals:?})")]
    NoConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("eigenvalue {index} is not simple (multiplet of size {size})")]
    NotSimple { index: usize, size: usize },

    #[error("index {index} out of range (have {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("multiplet not resolved: {0}")]
    Unresolved(String),

    #[error("finite-difference step too large: h and h/2 estimates {coarse} vs {fine}")]
    StepTooLarge { coarse: f64, fine: f64 },

    #[error("trace extraction failed: {0}")]
    Trace(String),

    #[error("continuation failed at alpha = {alpha}: {reason}")]
    Continuation { alpha: f64, reason: String },

    #[error("point lies outside the cone")]
    OutsideCone,

    #[error("insufficient eigenvalues: need {needed}, have {available}")]
    InsufficientEigenvalues { needed: usize, available: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
