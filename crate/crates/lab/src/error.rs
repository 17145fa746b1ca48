//! Error type of the harness.

use thiserror::Error;

/// Errors raised by commands and configuration handling.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] reluinit::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Result alias using [`LabError`].
pub type LabResult<T> = Result<T, LabError>;
