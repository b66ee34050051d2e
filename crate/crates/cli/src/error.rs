use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] macroplace::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{failed} of {total} runs failed")]
    RunsFailed { failed: usize, total: usize },

    #[error("{0} netlist violation(s)")]
    InvalidNetlist(usize),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 0 ok, 1 I/O or parse, 2 infeasible or bad configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_infeasible() => 2,
            CliError::Core(_) | CliError::Io { .. } | CliError::Json { .. } | CliError::InvalidNetlist(_) => 1,
            CliError::Config(_) | CliError::RunsFailed { .. } => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
