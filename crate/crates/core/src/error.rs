use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("column {0} has zero variance")]
    ZeroVarianceColumn(usize),
    #[error("matrix C is not positive definite")]
    SingularC,
    #[error("matrix factorization failed: not positive definite")]
    SingularMatrix,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("no convergence after {cycles} cycles (residual {residual:e})")]
    NotConverged { cycles: usize, residual: f64 },
    #[error("no admissible root of the coordinate cubic (a={a:e}, c={c:e}, mu={mu:e}, tau={tau:e})")]
    NoAdmissibleRoot { a: f64, c: f64, mu: f64, tau: f64 },
    #[error("numerical overflow in {0}")]
    NumericalOverflow(&'static str),
    #[error("Q evaluated at the saddle point must be positive, got {0:e}")]
    NonPositiveQ(f64),
    #[error("mu is a transition value for coordinate {0}")]
    TransitionValue(usize),
    #[error("marginal grid needs at least two points")]
    GridTooSmall,
    #[error("all entries of w are zero")]
    AllZeroW,
    #[error("MAP tau denominator underflows (perfect unpenalized fit)")]
    DegenerateDenominator,
    #[error("marginal point x={x:e} of coordinate {coordinate}: {source}")]
    MarginalPoint {
        coordinate: usize,
        x: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
