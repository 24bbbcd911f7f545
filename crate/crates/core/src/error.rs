use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid utility: {0}")]
    InvalidUtility(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex did not terminate within {0} pivots")]
    PivotLimit(usize),

    #[error("projection did not converge after {iterations} sweeps (residual {residual:e})")]
    ProjectionNotConverged {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error("argument {value} at coordinate {index} is outside the function's domain")]
    OutsideFunctionDomain { index: usize, value: f64 },

    #[error("grid search refused: dimension {0} exceeds 4")]
    GridTooLarge(usize),

    #[error("grid contains no feasible point")]
    EmptyGrid,
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
