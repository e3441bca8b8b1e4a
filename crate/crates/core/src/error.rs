use thiserror::Error;

use crate::model::ValidationReport;
use crate::simulate::TrimmedSample;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the function it was passed to.
    #[error("{what}: {value} is outside the domain")]
    Domain { what: &'static str, value: f64 },

    /// A tabulated model was asked for a value beyond its grid.
    #[error("{what} {value} lies outside the tabulated range [{lo}, {hi}]")]
    Extrapolation {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("model rejected: {}", .0.summary())]
    Rejected(Box<ValidationReport>),

    /// Adaptive quadrature stopped before reaching its tolerance.
    #[error("quadrature did not converge: partial value {partial:e}, error bound {bound:e}")]
    Quadrature { partial: f64, bound: f64 },

    /// The jump series needed more points than the configured budget.
    #[error("point budget exhausted at L = {}; achieved relative tolerance {achieved:e}", .partial.truncation_index)]
    Budget {
        partial: Box<TrimmedSample>,
        achieved: f64,
    },

    #[error("scheme {scheme} is incompatible: {reason}")]
    IncompatibleScheme { scheme: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty sample")]
    EmptySample,

    #[error("samples must be sorted in non-decreasing order")]
    NotSorted,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }

    pub(crate) fn incompatible(scheme: impl ToString, reason: impl Into<String>) -> Self {
        Error::IncompatibleScheme {
            scheme: scheme.to_string(),
            reason: reason.into(),
        }
    }
}
