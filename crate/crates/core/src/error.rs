use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {reason}")]
    Parse {
        file: String,
        line: usize,
        reason: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible specification: {0}")]
    InfeasibleSpec(String),

    #[error("stale incremental cache: {0}")]
    StaleCache(String),

    #[error("grid too small: {macros} macros but only {free} free grid cells")]
    GridTooSmall { macros: usize, free: usize },

    #[error("could not find a legal location for `{node}` after {attempts} attempts")]
    InitFailure { node: String, attempts: usize },

    #[error("spring system has no fixed anchor")]
    DegenerateSystem,

    #[error("seed placement has no location for `{0}`")]
    MissingSeedLocation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by an instance that cannot be placed as configured
    /// (as opposed to malformed input).
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::InfeasibleSpec(_)
                | Error::GridTooSmall { .. }
                | Error::InitFailure { .. }
                | Error::DegenerateSystem
                | Error::Config(_)
                | Error::Precondition(_)
        )
    }
}
