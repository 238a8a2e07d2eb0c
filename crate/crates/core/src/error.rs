use alloc::string::String;

use thiserror::Error;

use crate::taylor::ActivationKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("jet orders differ ({left} vs {right})")]
    OrderMismatch { left: usize, right: usize },

    #[error("order {requested} exceeds the supported maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },

    #[error("derivative {k} requested from a jet of order {order}")]
    DerivativeOutOfRange { k: usize, order: usize },

    #[error("activation `{0}` has no scalar derivative chain")]
    UnsupportedActivation(ActivationKind),

    #[error("unknown {what}; valid values: {valid}")]
    UnknownName { what: &'static str, valid: &'static str },

    #[error("unknown problem `{name}`; valid problems: {valid}")]
    UnknownProblem { name: String, valid: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite gradient component at index {index}: {value}")]
    NonFiniteGradient { index: usize, value: f64 },

    #[error("problem `{0}` has no exact solution")]
    NoExactSolution(String),

    #[error("residual partial dy{slot} disagrees with finite differences (analytic {analytic}, numeric {numeric})")]
    InconsistentPartials { slot: usize, analytic: f64, numeric: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
