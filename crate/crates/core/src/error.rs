use thiserror::Error;

/// Coarse classification of failures, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Caller passed arguments that violate a precondition.
    Input,
    /// A file or byte stream could not be read or decoded.
    Data,
    /// A numerical computation hit a degenerate or divergent configuration.
    Numeric,
    /// The request is well formed but cannot be satisfied.
    Infeasible,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected} sites, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("site index {site} out of range for a chain of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inconsistent tensor shapes: {0}")]
    Shape(String),

    #[error("operation requires an orthogonality center")]
    NoOrthoCenter,

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("sample {sample} has zero amplitude; loss and gradient diverge")]
    ZeroAmplitude { sample: usize },

    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("no power-law scaling: fitted slope {slope:.4} is not negative (d = {d_values:?})")]
    NoScaling { slope: f64, d_values: Vec<f64> },

    #[error("no energy threshold separates sample quality from the ground level (profile: {profile:?})")]
    ThresholdNotFound { profile: Vec<(f64, f64, f64)> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::LengthMismatch { .. }
            | Error::SiteOutOfRange { .. }
            | Error::InvalidArgument(_)
            | Error::Shape(_)
            | Error::NoOrthoCenter => ErrorKind::Input,
            Error::Parse { .. } | Error::Format(_) | Error::Io(_) => ErrorKind::Data,
            Error::Degenerate(_)
            | Error::ZeroAmplitude { .. }
            | Error::Internal(_)
            | Error::NoScaling { .. } => ErrorKind::Numeric,
            Error::Infeasible(_) | Error::ThresholdNotFound { .. } => ErrorKind::Infeasible,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
