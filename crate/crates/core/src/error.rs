use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension limit exceeded: {0}")]
    DimensionLimit(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd {
        min_eigenvalue: f64,
        witness: Vec<f64>,
    },

    #[error("negative scale factor {0}")]
    NegativeScale(f64),

    #[error("zero direction")]
    ZeroDirection,

    #[error("expected a univariate function, got input dimension {0}")]
    NotUnivariate(usize),

    #[error("not differentiable along coordinate {0}")]
    NotDifferentiable(usize),

    #[error("no smooth points among {0} samples")]
    NoSmoothSamples(usize),

    #[error("budget must be at least 1")]
    BudgetZero,

    #[error("precondition violated: {}", .0.join("; "))]
    PreconditionViolated(Vec<String>),

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error("invalid function spec at {path}: {message}")]
    Spec { path: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub(crate) fn dim_mismatch(what: &str, expected: usize, got: usize) -> Error {
    Error::DimensionMismatch(format!("{what}: expected {expected}, got {got}"))
}
