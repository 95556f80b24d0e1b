use thiserror::Error;

/// Errors raised by the observer library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("number of modes must be at least 1")]
    NoModes,

    #[error("dimension {0} is not even")]
    OddDimension(usize),

    #[error("{what}: expected {expected:?}, got {actual:?}")]
    Shape {
        what: &'static str,
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("{0}: matrix must be square")]
    NotSquare(&'static str),

    #[error("{0}: matrix contains non-finite entries")]
    NonFinite(&'static str),

    #[error("{what} is not symmetric (residual {residual:e})")]
    NotSymmetric { what: &'static str, residual: f64 },

    #[error("dynamics are not physically realizable (residual {residual:e})")]
    NotRealizable { residual: f64 },

    #[error("beta: {0}")]
    InvalidBeta(String),

    #[error("{0} is singular")]
    Singular(&'static str),

    #[error("{0} not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("C_o is rank deficient (smallest singular value {0:e})")]
    RankDeficient(f64),

    #[error("plant dynamics A_p must be zero for direct-coupled synthesis (max entry {0:e})")]
    NonzeroPlantDynamics(f64),

    #[error("observer condition C_o R_o^-1 alpha = -I violated (residual {0:e})")]
    ObserverCondition(f64),

    #[error("eigenvalue iteration failed to converge after {0} iterations")]
    NoConvergence(usize),

    #[error("time grid: {0}")]
    Grid(String),

    #[error("schedule: {0}")]
    Schedule(String),
}

pub type Result<T> = std::result::Result<T, Error>;
