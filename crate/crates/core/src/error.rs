use thiserror::Error;

use crate::algebra::Violation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("boundary vector {index} is not in the span of the cycles")]
    ContainmentViolation { index: usize },

    #[error("value for generator `{generator}` has degree {found:?}, expected {expected}")]
    InhomogeneousValue { generator: String, expected: i64, found: Option<i64> },

    #[error("model is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidModel(Vec<Violation>),

    #[error("the differential is not pure")]
    NotPure,

    #[error("the twisted differential is not Whitehead trivial")]
    NotWhiteheadTrivial,

    #[error("invalid bundle specification: {0}")]
    InvalidSpec(String),

    #[error("internal invariant failure: {0}")]
    Invariant(String),
}
