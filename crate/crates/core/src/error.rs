use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported matrix dimension {0} (only 2 and 4 are supported)")]
    UnsupportedDimension(usize),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("trace {0} differs from 1")]
    NotNormalized(f64),
    #[error("parameter `{name}` = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("invalid POVM: {0}")]
    InvalidPovm(&'static str),
    #[error("invalid encoding: {0}")]
    InvalidEncoding(&'static str),
    #[error("behavior alphabet does not match the task")]
    AlphabetMismatch,
    #[error("score is not monotone in the visibility near v = {0}")]
    NotMonotone(f64),
    #[error("no crossing of the target score in [0, 1]")]
    NoCrossing,
    #[error("linear program solver failure: {0}")]
    SolverFailure(&'static str),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
