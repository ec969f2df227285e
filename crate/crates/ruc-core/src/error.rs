//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands have incompatible dimensions.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative procedure failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// A value violates its type invariant.
    #[error("invalid state: {0}")]
    InvalidState(String),
    /// A configured budget (points, memory, integer width) was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
