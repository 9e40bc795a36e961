use thiserror::Error;

/// Errors raised by the library. Variants map onto the failure classes the
/// CLI distinguishes (configuration, domain, numerical).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("value {value} lies outside [-{lambda}, {lambda}]")]
    Domain { value: f64, lambda: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("out-of-band region is empty (oversampling factor {of} <= 1)")]
    EmptyBand { of: f64 },
    #[error("support half-width {half_width} needs {needed} out-of-band bins, only {available} available")]
    InsufficientBandwidth {
        half_width: usize,
        needed: usize,
        available: usize,
    },
    #[error("linear system is ill-conditioned (condition number {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error("anchoring failed: {0}")]
    Anchoring(String),
    #[error("oracle search space of {size:.3e} points exceeds the limit {limit:.0e}")]
    OracleTooLarge { size: f64, limit: f64 },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
