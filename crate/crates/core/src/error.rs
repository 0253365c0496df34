use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("factor loadings are rank deficient after {attempts} placement attempts")]
    RankDeficient { attempts: usize },

    #[error("warm-up data is degenerate: {0}")]
    Degenerate(String),

    #[error("eigengap assumption violated: lambda_k - lambda_(k+1) = {gap:e}")]
    NoEigengap { gap: f64 },

    #[error("sample covariance too ill-conditioned even with ridge {ridge:e}")]
    IllConditioned { ridge: f64 },

    #[error("non-finite observation at tick {tick}, stream {stream}")]
    NonFinite { tick: usize, stream: usize },

    #[error("correlation structure is not square-summable: {0}")]
    NotSquareSummable(String),

    #[error("empty evaluation window")]
    EmptyWindow,

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
