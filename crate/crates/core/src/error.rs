use thiserror::Error;

use crate::model::ConstraintRef;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("non-finite entry in {0}")]
    NonFinite(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point is infeasible: {worst} violated by {violation:e}")]
    InfeasiblePoint {
        worst: ConstraintRef,
        violation: f64,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("stationarity conditions violated (largest residual {max_residual:e})")]
    SystemViolated { max_residual: f64 },

    #[error("postcondition violated: {0}")]
    PostconditionViolated(String),

    #[error("{biactive} biactive indices exceed the branch cap of {cap}")]
    BranchBudgetExceeded { biactive: usize, cap: usize },

    #[error("{biactive} biactive indices exceed the pattern budget of {cap}")]
    PatternBudgetExceeded { biactive: usize, cap: usize },

    #[error("tangent sampling needs affine problem data")]
    NotAffine,
}

pub(crate) fn check_len(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what: what.to_string(),
            expected,
            got,
        })
    }
}
