//! Command-line front end: argument resolution, memo persistence and report
//! output. `run` returns the process exit code.

pub mod args;
mod commands;
pub mod memo;

use std::io::Write;

use gorenstein_core::Error;

pub use commands::run;

pub mod exit {
    pub const OK: i32 = 0;
    /// Not Gorenstein, or identity violations.
    pub const NEGATIVE: i32 = 1;
    pub const BAD_INPUT: i32 = 2;
    pub const BUDGET: i32 = 3;
    pub const EXTRACTION: i32 = 4;
    pub const INCONCLUSIVE: i32 = 5;
    pub const INTEGRITY: i32 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                Error::BudgetExceeded { .. } => exit::BUDGET,
                Error::ExtractionFailed(_) => exit::EXTRACTION,
                Error::Integrity(_) | Error::WitnessNotFound(_) => exit::INTEGRITY,
                Error::InfeasibleSignature(_)
                | Error::UnknownName(_)
                | Error::InvariantViolation(_)
                | Error::ShapeMismatch { .. }
                | Error::UnsupportedRegime(_)
                | Error::LevelMismatch { .. }
                | Error::NotApplicable(_)
                | Error::InvalidInput(_) => exit::BAD_INPUT,
            },
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => exit::BAD_INPUT,
        }
    }
}

pub(crate) fn report_error(err: &mut dyn Write, e: &CliError) {
    let _ = writeln!(err, "error: {e}");
}
