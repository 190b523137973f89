use std::fmt;

use kovtop_core::{Error, ErrorKind};

/// Failures of a run, each mapped to a process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed document, wrong types or unknown keys.
    Schema(String),
    /// Well-formed but unacceptable value.
    Value { key: String, msg: String },
    /// Error raised by the numerical core.
    Core(Error),
    Io(String),
}

impl CliError {
    pub fn value(key: &str, msg: &str) -> Self {
        CliError::Value { key: key.into(), msg: msg.into() }
    }

    pub fn from_json(e: serde_json::Error) -> Self {
        let text = e.to_string();
        // overflowing literals such as 1e999 are the only way JSON spells a non-finite number
        if text.contains("number out of range") {
            CliError::Value { key: format!("line {} column {}", e.line(), e.column()), msg: "must be finite".into() }
        } else {
            CliError::Schema(text)
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) | CliError::Value { .. } => 2,
            CliError::Io(_) => 3,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Input => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Regime => 4,
            },
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "schema error: {m}"),
            CliError::Value { key, msg } => write!(f, "value error at `{key}`: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
