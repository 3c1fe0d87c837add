use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// Evaluation at (or numerically indistinguishable from) a singular point.
    #[error("singular point in {func}: {detail}")]
    Singular { func: &'static str, detail: String },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}, tolerance {tolerance:e}")]
    Quadrature { estimate: f64, error: f64, tolerance: f64 },

    /// The closed-form transfer curve is ill conditioned near s = 0.
    #[error("closed form is ill conditioned for |s| = {s} < {s_min}")]
    Conditioning { s: f64, s_min: f64 },

    #[error("root solve failed: {0}")]
    RootSolve(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dipole bias infeasible: target {target} exceeds the maximum {max} for {pairs} biased pairs")]
    BiasInfeasible { target: f64, max: f64, pairs: usize },

    #[error("config error: {0}")]
    Config(String),

    /// Malformed input data; `offset` is the byte offset of the offending line.
    #[error("{path}: parse error at byte offset {offset}: {detail}")]
    Parse {
        path: String,
        offset: usize,
        detail: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("sink error: {0}")]
    Sink(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn singular(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Singular {
            func,
            detail: detail.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input or configuration rather than by
    /// a numerical failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidParameter(_) | Error::Parse { .. } | Error::BiasInfeasible { .. }
        )
    }
}
