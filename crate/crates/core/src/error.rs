use thiserror::Error;

use crate::diagnostics::BlowUpReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected {expected:?} points, found {found:?}")]
    ShapeMismatch { expected: [usize; 3], found: [usize; 3] },

    #[error("invalid worker count {workers}: must lie in 1..={max}")]
    InvalidWorkers { workers: usize, max: usize },

    #[error("failed to start worker team: {0}")]
    WorkerTeam(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("blow-up at step {step}: {report}")]
    BlowUp { step: u64, report: BlowUpReport },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("underdetermined fit: {0}")]
    Underdetermined(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
