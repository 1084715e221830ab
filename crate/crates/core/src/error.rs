//! Crate-wide error type and result alias.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A size parameter fell outside the supported range.
    #[error("{what} {value} outside supported range {min}..={max}")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    /// A slice or vector had the wrong length for the operation.
    #[error("{what} has length {actual}, expected {expected}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// An index addressed something outside the valid range.
    #[error("{what} {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    /// The instance violates a structural invariant.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A numeric argument violates a mathematical precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed text input; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The instance generator exhausted its attempt budget or was
    /// given an unsatisfiable specification.
    #[error("generation failed: {0}")]
    Generation(String),

    /// The optimizer could not produce a usable result.
    #[error("optimization failed: {0}")]
    Optimization(String),

    /// Structured text (CSV, parameter dumps, config files) did not
    /// match the expected layout.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: optimizer failures are
    /// distinguished from validation and input errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Optimization(_) => 2,
            _ => 1,
        }
    }
}
