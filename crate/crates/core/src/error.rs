//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A distribution was constructed with invalid parameters.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A neuron with zero weight vector has no knot.
    #[error("neuron has zero weight vector and no knot")]
    ConstantNeuron,

    /// Dimensions of two objects disagree.
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    /// The bias/weight ratio distribution is not continuous where required.
    #[error("ratio distribution is discontinuous: {0}")]
    UnsupportedContinuity(String),

    /// A data-dependent bias scheme was used without layer inputs.
    #[error("data-dependent bias scheme requires layer inputs")]
    MissingLayerInputs,

    /// A configuration value is invalid.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation needs at least one element.
    #[error("empty input: {0}")]
    Empty(&'static str),
}

/// Result alias using [`Error`].
pub type Result<T> = std::result::Result<T, Error>;
