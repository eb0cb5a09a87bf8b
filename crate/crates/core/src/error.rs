use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
///
/// Variants that describe bad caller input map to exit status 2 in the CLI;
/// everything else is treated as an internal failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("degenerate system: a single map has a one-point attractor")]
    DegenerateSystem,

    #[error("invalid self-similar system: {0}")]
    InvalidSystem(String),

    #[error("rate exponent undefined: gamma = {gamma} is not below q = {q}")]
    RateUndefined { gamma: f64, q: f64 },

    #[error("cover too large: estimated {estimate} words exceeds the cap of {cap}")]
    CoverTooLarge { estimate: f64, cap: usize },

    #[error("empty stratum: points_per_cell must be at least 1")]
    EmptyStratum,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("gram not PSD within tolerance (jitter up to {max_jitter:e} of the diagonal)")]
    NotPsd { max_jitter: f64 },

    #[error("window too narrow: {resolved} resolved points, at least 4 required")]
    WindowTooNarrow { resolved: usize },

    #[error("root solver failed: {0}")]
    Solver(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Failure to write an artifact; not the caller's fault.
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True when the error is the caller's fault (bad arguments, bad files).
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Solver(_) | Error::Output { .. } | Error::Csv(_) | Error::Json(_) | Error::NotPsd { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
