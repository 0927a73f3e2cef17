//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::estimate::FitResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The `q`-th moment of the g-and-h law exists only for `h < 1/q`.
    #[error("moment of order {q} does not exist for h = {h} (requires h < 1/{q})")]
    MomentUndefined { q: u32, h: f64 },

    /// A score or summary that needs finite tail moments was requested
    /// for a law whose tails are too heavy.
    #[error("{what} is undefined for tail parameter {h}")]
    Undefined { what: &'static str, h: f64 },

    /// Iterative root finding did not reach the tolerance.
    #[error(
        "root finding did not converge after {iterations} iterations, last bracket [{lo}, {hi}]"
    )]
    RootNotConverged { iterations: usize, lo: f64, hi: f64 },

    /// Every optimizer start stopped before meeting its tolerances. The best
    /// point found is still reported.
    #[error("optimizer did not converge from any start (best log-likelihood {})", .0.loglik)]
    NotConverged(Box<FitResult>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
