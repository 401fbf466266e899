use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 16")]
    InvalidGridSize(usize),

    #[error("grid mismatch: expected n = {expected}, got n = {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("field has {found} values, expected {expected}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("phase index out of range or repeated: ({i}, {j}) with K = {k}")]
    InvalidPair { i: usize, j: usize, k: usize },

    #[error("marker difference for pair ({i}, {j}) vanishes identically (fat tie set)")]
    DegenerateContour { i: usize, j: usize },

    #[error("integration failed at t = {time} after {steps} steps: {reason}")]
    Integration {
        time: f64,
        steps: usize,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
