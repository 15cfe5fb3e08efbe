use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input text (JSON, rationals, expressions).
    #[error("parse error: {0}")]
    Parse(String),
    /// Mismatched shapes: variable lists, indices, arities.
    #[error("structural error: {0}")]
    Structural(String),
    /// An object violates an invariant of its type.
    #[error("validation error: {0}")]
    Validation(String),
    /// Input is well formed but outside what an operation supports.
    #[error("unsupported shape: {0}")]
    Unsupported(String),
    /// Normalization with every sibling transition vanishing.
    #[error("degenerate normalization: {0}")]
    Degenerate(String),
    /// A numeric routine could not reach the requested tolerance.
    #[error("accuracy error: requested {requested}, best bound {best_bound}")]
    Accuracy { requested: String, best_bound: String },
    /// A search or enumeration exceeded its budget.
    #[error("budget exceeded: {what} (limit {limit})")]
    Budget { what: String, limit: u64 },
    /// Bad command-line usage.
    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    /// Process exit code used by the CLI and mirrored by the FFI status codes.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Parse(_)
            | Error::Structural(_)
            | Error::Validation(_)
            | Error::Unsupported(_)
            | Error::Degenerate(_) => 3,
            Error::Accuracy { .. } | Error::Budget { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
