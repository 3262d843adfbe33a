//! Process-level error type carrying the documented exit codes.

use std::fmt;

/// Failures the harness reports: `Config` exits 2, `Numerical` exits 3.
#[derive(Debug)]
pub enum AppError {
    /// The config file or command line is wrong (bad schema, bad field,
    /// parameters outside module preconditions, unreadable paths).
    Config(String),
    /// A computation failed or a solve ended without its certificate.
    Numerical(String),
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => 2,
            AppError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(msg) => write!(f, "config error: {msg}"),
            AppError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for AppError {}

/// Library failures rooted in run parameters (dimension mismatches, values
/// outside preconditions, size caps) are config errors; the rest are
/// numerical.
pub fn from_lib(e: sparsetrig::Error) -> AppError {
    use sparsetrig::Error;
    match e {
        Error::DimensionMismatch { .. }
        | Error::InvalidParameter(_)
        | Error::CapExceeded { .. }
        | Error::NoFiniteTruncation => AppError::Config(e.to_string()),
        _ => AppError::Numerical(e.to_string()),
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
