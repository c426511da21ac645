use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the reward-learning library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (wrong dimension, wrong
    /// dependence mode, empty input, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Invalid experiment, sampler or environment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// The posterior mean collapsed to the zero vector.
    #[error("degenerate estimate: {0}")]
    DegenerateEstimate(String),

    /// No finite log-posterior found while initializing a chain.
    #[error("chain initialization failed after {attempts} attempts")]
    Initialization { attempts: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
