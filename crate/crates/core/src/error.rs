//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by grid construction, weight generation, statistics,
/// and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// Grid geometry violates an invariant (too few nodes, nonmonotone
    /// coordinates, wrong endpoints).
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A quadrature rule cannot be applied to the given axis, e.g. a
    /// Simpson/Boole node count that breaks composite compatibility.
    #[error("incompatible rule: {0}")]
    RuleIncompatible(String),

    /// Array shapes do not line up (field vs weights, moments vs field).
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Parameter outside its valid range (alpha, group count, p-value...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// No analytic field registered under this name / dimension.
    #[error("unknown field: {0}")]
    UnknownField(String),

    /// Field variance below the floor required by the output-consistency
    /// experiments.
    #[error("degenerate field: {0}")]
    DegenerateField(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed field file or CSV input.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
