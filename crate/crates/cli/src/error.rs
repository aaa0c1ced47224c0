use std::fmt;

use entlab_core::Error;

/// Process exit codes.
pub mod exit {
    /// Success, or a search that found what it looked for.
    pub const OK: u8 = 0;
    /// A search that completed cleanly without finding anything.
    pub const NOT_FOUND: u8 = 1;
    /// Bad flags, unreadable or malformed input files, invalid channel/state specs.
    pub const INPUT: u8 = 2;
    /// Dimension mismatch or violated numerical contract.
    pub const CONTRACT: u8 = 3;
    /// Internal numeric failure, including failed self-checks.
    pub const NUMERIC: u8 = 4;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: exit::INPUT,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: exit::NUMERIC,
            message: message.into(),
        }
    }

    /// Maps a core error to its exit code, prefixing the message with `context`.
    pub fn with_context(context: &str, e: Error) -> Self {
        let mut err = Self::from(e);
        err.message = format!("{context}: {}", err.message);
        err
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Domain(_) | Error::NoDecay => exit::INPUT,
            Error::Dimension(_)
            | Error::NotHermitian { .. }
            | Error::NotPsd { .. }
            | Error::InvalidState(_)
            | Error::InvalidChannel(_) => exit::CONTRACT,
            Error::Bracket { .. } => exit::NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::input(format!("malformed JSON: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::input(format!("csv error: {e}"))
    }
}
