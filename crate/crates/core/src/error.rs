use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point, sub-box or path left the region an object is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A construction was asked for something it cannot deliver.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Caller violated a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Non-finite values, singular Jacobians and the like.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The input section is not parallel off the obstacle at the requested tolerance.
    #[error("input section is not parallel: {0}")]
    InputIntegrity(String),

    /// Two constructions that must agree did not.
    #[error("inconsistent extensions: max discrepancy {discrepancy:e} at {location:?}")]
    Inconsistency {
        discrepancy: f64,
        location: Vec<f64>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
