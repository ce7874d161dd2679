use std::fmt;

use cancelput_core::PricingError;
use serde_json::{json, Value};

/// Failures that end a command, mapped to exit codes 2 and 3.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config entries or model parameters.
    Input {
        kind: &'static str,
        message: String,
    },
    Io(String),
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input {
            kind: "InvalidInput",
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Input { kind, message } => (*kind, message.as_str()),
            CliError::Io(message) => ("IoError", message.as_str()),
        };
        json!({ "error": kind, "message": message })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input { message, .. } | CliError::Io(message) => f.write_str(message),
        }
    }
}

impl From<PricingError> for CliError {
    fn from(e: PricingError) -> Self {
        CliError::Input {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
