//! Library-wide error type.

/// Errors surfaced by the library.
///
/// Preconditions that callers can always check cheaply (dimension mismatch,
/// out-of-range parameters) are reported here rather than by panicking, so the
/// CLI can map them to clean exits.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A size guard tripped. `needed` is the size the operation would have
    /// required, `cap` the configured limit.
    #[error("{what}: size {needed} exceeds configured cap {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    /// Requested a finite truncation for a class whose projection error bound
    /// does not decay (the plain Wiener ball).
    #[error("no finite truncation achieves the requested projection error for this class")]
    NoFiniteTruncation,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    /// A point handed to an optimality certificate violates the constraint.
    #[error("infeasible point: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
