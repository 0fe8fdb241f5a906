use thiserror::Error;

/// Errors raised by the numerical kernels and the design layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {len} entries do not form a dim x dim array")]
    NotSquare { len: usize },

    #[error("dimension mismatch: expected {expected}x{expected}, got {got}x{got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max |A - A^H| = {0:e})")]
    NotHermitian(f64),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("Kraus operators are not trace preserving (max |sum A^H A - I| = {0:e})")]
    NotTracePreserving(f64),

    #[error("POVM is not complete (max |sum M - I| = {0:e})")]
    IncompletePovm(f64),

    #[error("POVM element {index} is not positive semidefinite (min eigenvalue {min_eig:e})")]
    PovmNotPsd { index: usize, min_eig: f64 },

    #[error("probability has imaginary residue {0:e}")]
    ComplexProbability(f64),

    #[error("damping probability {0} outside [0, 1]")]
    InvalidGamma(f64),

    #[error("singular Fisher point: outcome {outcome} has p = {prob:e} but dp/dtheta = {grad:e}")]
    SingularFisher { outcome: usize, prob: f64, grad: f64 },

    #[error("every configuration is singular at theta index {0}")]
    SingularColumn(usize),

    #[error("no configuration is free of singular Fisher entries")]
    NoUsableConfiguration,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("empty Fisher table")]
    EmptyTable,

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("linear program is {0}")]
    LpStatus(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
