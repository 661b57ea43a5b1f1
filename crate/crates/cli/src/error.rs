use std::fmt;
use std::path::Path;

use physimetrics_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const PARSE: i32 = 2;
    pub const INVARIANT: i32 = 3;
    pub const VIOLATIONS: i32 = 4;
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable or malformed input; `offset` is a byte offset when known.
    Parse {
        file: String,
        offset: Option<u64>,
        message: String,
    },
    /// Bad command-line parameters.
    Usage(String),
    /// Input parsed but violates a data or configuration invariant.
    Invariant(String),
}

impl CliError {
    pub fn parse(file: impl AsRef<Path>, offset: Option<u64>, message: impl Into<String>) -> Self {
        CliError::Parse {
            file: file.as_ref().display().to_string(),
            offset,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) => exit::PARSE,
            CliError::Invariant(_) => exit::INVARIANT,
        }
    }

    /// Wraps a core error raised while processing `file`.
    pub fn from_core(file: impl AsRef<Path>, err: CoreError) -> Self {
        match err {
            CoreError::Parse(msg) => CliError::parse(file, None, msg),
            other => CliError::Invariant(format!("{}: {other}", file.as_ref().display())),
        }
    }
}

impl fmt::Display for CliError {
    /// Single line: `error[<kind>]: <detail>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let line = match self {
            CliError::Parse {
                file,
                offset: Some(off),
                message,
            } => format!("error[parse]: {file}@{off}: {message}"),
            CliError::Parse {
                file,
                offset: None,
                message,
            } => format!("error[parse]: {file}: {message}"),
            CliError::Usage(msg) => format!("error[usage]: {msg}"),
            CliError::Invariant(msg) => format!("error[invariant]: {msg}"),
        };
        f.write_str(&line.replace('\n', " "))
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;
