//! Config-driven experiments: `run`, `exact`, `gap`, `theory`.
//!
//! Every command returns an [`Outcome`]; [`exit_code`] maps it onto the
//! process contract (0 ok, 1 usage error, 2 diagnostic failure).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;

use std::io::Write;

use thiserror::Error;

pub use commands::{cmd_exact, cmd_gap, cmd_run, cmd_theory};
pub use config::{ExperimentConfig, FamilyFlags};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{field}: {message}")]
    Usage { field: String, message: String },
    #[error(transparent)]
    Model(#[from] rrms::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub(crate) fn usage(field: &str, message: impl Into<String>) -> CliError {
    CliError::Usage {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Result of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    DiagnosticFailure,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DIAGNOSTIC: i32 = 2;

/// Prints errors to `err` and returns the process exit code.
pub fn exit_code(result: Result<Outcome, CliError>, err: &mut dyn Write) -> i32 {
    match result {
        Ok(Outcome::Passed) => EXIT_OK,
        Ok(Outcome::DiagnosticFailure) => EXIT_DIAGNOSTIC,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
