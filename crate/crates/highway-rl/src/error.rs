//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value or an infeasible scenario setup.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An API contract was violated (dimension mismatch, empty buffer, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// `step` was called on an episode that already terminated.
    #[error("episode already finished; reset the environment before stepping")]
    EpisodeFinished,

    /// Training produced a non-finite loss or score.
    #[error("training diverged: {0}")]
    Divergence(String),

    /// A checkpoint file is malformed or inconsistent with its config.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// A checkpoint was written by an unsupported format version.
    #[error("unsupported checkpoint version {0} (expected 1)")]
    CheckpointVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
