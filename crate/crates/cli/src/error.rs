use kg_core::diagnostics::BlowUpReport;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Unreadable or malformed input files, write failures, solver faults.
    pub const IO: i32 = 1;
    /// Bad flags, config file or parameter values.
    pub const USAGE: i32 = 2;
    pub const BLOW_UP: i32 = 3;
    pub const FIT: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("blow-up at step {step}: {report}")]
    BlowUp { step: u64, report: BlowUpReport },
    #[error("model fit failed: {0}")]
    Fit(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io(_) => exit::IO,
            CliError::BlowUp { .. } => exit::BLOW_UP,
            CliError::Fit(_) => exit::FIT,
        }
    }

    pub fn io(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{context}: {e}"))
    }
}

impl From<kg_core::Error> for CliError {
    fn from(e: kg_core::Error) -> Self {
        use kg_core::Error as E;
        match e {
            E::BlowUp { step, report } => CliError::BlowUp { step, report },
            E::InvalidGrid(_) | E::ShapeMismatch { .. } | E::InvalidWorkers { .. } | E::InvalidParameter(_) => {
                CliError::Usage(e.to_string())
            }
            E::Underdetermined(_) => CliError::Fit(e.to_string()),
            other => CliError::Io(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
