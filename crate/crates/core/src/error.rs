use thiserror::Error;

use crate::quad::QuadError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid model: {0}")]
    InvalidModel(&'static str),

    #[error("unstable model: mean input rate {mean_rate} must be below the unit output rate")]
    Unstable { mean_rate: f64 },

    #[error(transparent)]
    Quadrature(#[from] QuadError),

    #[error("root bracket for target {target} grew past {limit} without crossing")]
    BracketOverflow { target: f64, limit: f64 },

    #[error(
        "transient transform is singular: xi = {xi} is within the guard of phi(alpha) = {phi}; perturb alpha"
    )]
    SingularTransient { xi: f64, phi: f64 },

    #[error("time {t} lies outside the path horizon [0, {horizon}]")]
    OutsideHorizon { t: f64, horizon: f64 },

    #[error("expected event count {expected} exceeds the configured cap {cap}")]
    TooManyEvents { expected: f64, cap: f64 },

    #[error("exact stationary sampling needs exponential jobs; use burn-in instead")]
    StationaryUnsupported,

    #[error("empty probe sample")]
    EmptyProbeSample,

    #[error("no emptiness observed; variance plug-in unavailable")]
    NoEmptiness,

    #[error("grid-width heuristic undefined: xi * T = {0} must exceed 1")]
    HeuristicUndefined(f64),

    #[error("Lévy tail cutoff not found below {0}")]
    TailCutoff(f64),

    #[error("invalid probability table: {0}")]
    InvalidTable(&'static str),

    #[error("invalid observations: {0}")]
    InvalidObservations(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}

/// Checks `value > 0` and finite.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if crate::math::is_positive_finite(value) {
        Ok(value)
    } else {
        Err(Error::param(name, value, "must be positive and finite"))
    }
}

pub(crate) fn require_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::param(name, value, "must be nonnegative and finite"))
    }
}
