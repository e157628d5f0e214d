use thiserror::Error;

use crate::flow::Interval;

/// Errors raised while building, evaluating or inverting worldline families.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    /// Malformed input: wrong dimensions, coincident nodes, bad configuration.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("time {time} lies outside the interval {interval}")]
    OutsideInterval { time: f64, interval: Interval },

    #[error("parameter {param:?} lies outside the parameter box")]
    ParameterOutsideBox { param: Vec<f64> },

    /// Newton iteration did not reach the residual target.
    #[error("inversion failed after {iterations} iterations (residual {residual:e})")]
    InversionFailure {
        iterate: Vec<f64>,
        residual: f64,
        iterations: usize,
    },

    /// Newton iterates could not be kept inside the parameter box.
    #[error("inversion left the parameter box after {iterations} iterations at {iterate:?}")]
    DomainEscape { iterate: Vec<f64>, iterations: usize },

    /// The integrated state left the declared domain of the right-hand side.
    #[error("integration left the domain of the right-hand side at t = {time}")]
    Escape { time: f64 },

    #[error("integration produced a non-finite state at t = {time}")]
    BlowUp { time: f64 },

    /// A requested operation needs something the family does not provide.
    #[error("capability unavailable: {0}")]
    Capability(String),

    #[error("no admissible chart: {0}")]
    Localization(String),
}

impl FlowError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        FlowError::Validation(msg.into())
    }

    /// True for failures of the inversion step (as opposed to bad input).
    pub fn is_inversion_failure(&self) -> bool {
        matches!(
            self,
            FlowError::InversionFailure { .. }
                | FlowError::DomainEscape { .. }
                | FlowError::Escape { .. }
                | FlowError::BlowUp { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, FlowError>;
