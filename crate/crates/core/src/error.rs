//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by any stage of the pipeline.
///
/// The variants are coarse on purpose: callers mostly need to distinguish
/// bad inputs (`Dimension`, `Validation`, `Parse`), runtime signal issues
/// (`Detection`), model lifecycle misuse (`State`, `Checkpoint`), aborted
/// training (`Training`), and plain I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Shape or length mismatch between buffers that must agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Input violates a documented precondition.
    #[error("invalid input: {0}")]
    Validation(String),

    /// Gait event detection failed on a stride.
    #[error("event detection failed: {0}")]
    Detection(String),

    /// Operation requires a model state the caller does not have.
    #[error("model state: {0}")]
    State(String),

    /// Checkpoint file is unreadable, corrupted, or from another version.
    #[error("checkpoint: {0}")]
    Checkpoint(String),

    /// A dataset file failed to parse; names the file and 1-based line.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Training aborted, e.g. on a non-finite loss or gradient.
    #[error("training aborted at iteration {iteration}: {message}")]
    Training { iteration: usize, message: String },

    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
