use thiserror::Error;

/// Errors raised across the dispatch engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: String, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("period index mismatch: state is at period {state}, forecast row is for period {row}")]
    PeriodMismatch { state: usize, row: usize },

    #[error("value {value} outside of range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("linear program is infeasible{}", .0.as_ref().map(|c| format!(" (violated: {c})")).unwrap_or_default())]
    Infeasible(Option<String>),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("numerical failure in LP solver: {0}")]
    Numerical(String),

    #[error("solver failed at iteration {iteration}, period {period}: {source}")]
    Training {
        iteration: usize,
        period: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn param(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors originating in an optimization solve.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::Infeasible(_) | Error::Unbounded | Error::Numerical(_) => true,
            Error::Training { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
