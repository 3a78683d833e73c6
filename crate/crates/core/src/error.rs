use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("drift matrix is not Hurwitz (spectral abscissa {abscissa:e})")]
    NotStable { abscissa: f64 },

    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("mode index {index} out of range for {modes} modes")]
    IndexOutOfRange { index: usize, modes: usize },

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("invalid covariance matrix: {0}")]
    InvalidCovariance(String),

    #[error("coefficient vector is zero")]
    ZeroVector,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("Bogoliubov coefficients not normalized: -l1^2 + l2^2 + l3^2 = {value}")]
    NotNormalized { value: f64 },

    #[error("lambda point infeasible: 1 + l1^2 - l2^2 = {value} < 0")]
    Infeasible { value: f64 },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("figures of merit need descending non-negative input, got {0:?}")]
    UnsortedInput([f64; 3]),

    #[error("every evaluated coupling vector is dynamically unstable")]
    AllUnstable,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
