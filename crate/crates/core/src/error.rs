//! Crate-wide error type.

use crate::numeric::Real;
use crate::sampler::RunTrace;

/// Errors produced by the library. Generic over the scalar type so that
/// partial results (e.g. a runaway trace) keep their precision.
#[derive(Debug, thiserror::Error)]
pub enum Error<T: Real = f64> {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "absolute continuity violated: target has mass at x = {x} where the proposal has none"
    )]
    AbsoluteContinuity { x: T },

    #[error("standardization failed: {0}")]
    Standardization(String),

    #[error("density ratio is numerically unbounded on the evaluation grid")]
    InfiniteDivergence,

    #[error("quadrature did not converge to the requested tolerance")]
    Quadrature,

    #[error("run exceeded max_steps = {max_steps}; partial trace attached")]
    RunawayRun {
        max_steps: u32,
        trace: Box<RunTrace<T>>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl<T: Real> Error<T> {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<V, T = f64> = std::result::Result<V, Error<T>>;
