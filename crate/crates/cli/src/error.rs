use std::path::PathBuf;

use compdyn::cset::CSetError;
use compdyn::dynam::DynamError;
use compdyn::modelspec::SpecError;
use compdyn::wiring::WiringError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Model { path: PathBuf, source: SpecError },
    #[error(transparent)]
    Wiring(#[from] WiringError),
    #[error(transparent)]
    CSet(#[from] CSetError),
    #[error(transparent)]
    Dynam(#[from] DynamError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }
}
