use std::process::ExitCode;

use dpsr_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{what}: need {needed}, cap is {cap}; raise {flag} to allow it")]
    Cap {
        what: &'static str,
        needed: u128,
        cap: u128,
        flag: &'static str,
    },
    #[error(transparent)]
    Core(CoreError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("writing output: {0}")]
    Output(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) | CliError::Core(_) => ExitCode::from(2),
            CliError::Cap { .. } => ExitCode::from(3),
            CliError::Io { .. } | CliError::Output(_) => ExitCode::from(1),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::CapExceeded { what, needed, cap } => CliError::Cap {
                what,
                needed,
                cap,
                flag: cap_flag(what),
            },
            other => CliError::Core(other),
        }
    }
}

/// Which flag governs a given core cap.
fn cap_flag(what: &str) -> &'static str {
    match what {
        "neighbor pairs" | "inputs" => "--pair-cap",
        _ => "--outcome-cap",
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
