//! File formats, the analysis pipeline and plot-data emission behind the
//! `singularity` binary.

pub mod analyze;
pub mod io;
pub mod plot;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("no model accepted")]
    NoModel,
    #[error("solver fault: {0}")]
    Solver(#[from] singularity_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::NoModel => 3,
            CliError::Solver(_) => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
