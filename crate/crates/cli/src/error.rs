use std::path::PathBuf;

use thiserror::Error;
use vlab_core::VlabError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] VlabError),

    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("catalog: {0}")]
    Catalog(String),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit status: 2 for anything the caller can fix by changing
    /// arguments, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(VlabError::InvalidParameter(_) | VlabError::WindowOutOfRange { .. }) => 2,
            _ => 1,
        }
    }
}
