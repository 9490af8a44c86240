use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification of an [`Error`], used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments, shapes or ranks supplied by the caller.
    Validation,
    /// Files that are missing, unreadable or malformed.
    Io,
    /// A numerical kernel failed (non-finite data, no convergence).
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid shape {shape:?}: {reason}")]
    InvalidShape { shape: Vec<usize>, reason: &'static str },

    #[error("mode {mode} out of range for order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("rank {rank} out of range for mode {mode} (must be in 1..={max})")]
    RankOutOfRange { mode: usize, rank: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("input contains non-finite values")]
    NonFinite,

    #[error("input is identically zero")]
    ZeroInput,

    #[error("SVD did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: Vec<u8> },

    #[error("unsupported format version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u16, supported: u16 },

    #[error("unknown {field} tag {value}")]
    UnknownTag { field: &'static str, value: u8 },

    #[error("truncated payload: needed {needed} bytes, {available} available")]
    TruncatedPayload { needed: u64, available: u64 },

    #[error("truncated data: needed {needed} bytes, {available} available")]
    TruncatedData { needed: u64, available: u64 },

    #[error("{0} trailing bytes after declared payload")]
    TrailingBytes(u64),

    #[error("inconsistent artifact: {0}")]
    Inconsistent(String),

    #[error("value {value} at index {index} is not representable as {dtype}")]
    Unrepresentable { value: f64, index: usize, dtype: &'static str },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// The innermost error, looking through any added context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Context { source, .. } => source.kind(),
            Error::ShapeMismatch(_)
            | Error::InvalidShape { .. }
            | Error::ModeOutOfRange { .. }
            | Error::RankOutOfRange { .. }
            | Error::InvalidParameter(_)
            | Error::ZeroInput
            | Error::Unrepresentable { .. } => ErrorKind::Validation,
            Error::NonFinite | Error::NoConvergence { .. } => ErrorKind::Numerical,
            Error::BadMagic { .. }
            | Error::UnsupportedVersion { .. }
            | Error::UnknownTag { .. }
            | Error::TruncatedPayload { .. }
            | Error::TruncatedData { .. }
            | Error::TrailingBytes(_)
            | Error::Inconsistent(_)
            | Error::UnsupportedFormat(_)
            | Error::MalformedHeader(_)
            | Error::MissingFile(_)
            | Error::Csv(_)
            | Error::Io(_) => ErrorKind::Io,
        }
    }
}
