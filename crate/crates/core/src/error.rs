use thiserror::Error;

use crate::dsl::{EvalError, ParseError};
use crate::structure::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} is not an even number >= 2")]
    BadDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("inverse check failed: |g g^-1 - I| = {residual:.3e}")]
    InverseInaccurate { residual: f64 },

    #[error("invalid almost product structure: {}", join_violations(.0))]
    InvalidStructure(Vec<Violation>),

    #[error("not a W1 point at {point:?}: residual {residual:.3e} exceeds {tolerance:.1e}")]
    NotW1 {
        point: Vec<f64>,
        residual: f64,
        tolerance: f64,
    },

    #[error("finite-difference step {0} outside the accepted range [1e-7, 1e-1]")]
    BadStep(f64),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("invalid input: {0}")]
    Field(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
