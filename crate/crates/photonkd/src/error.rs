use std::fmt;
use std::process::ExitCode;

/// Process exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Verification = 1,
    Config = 2,
    Data = 3,
}

impl ExitKind {
    pub fn code(self) -> ExitCode {
        ExitCode::from(self as u8)
    }
}

#[derive(Debug, thiserror::Error)]
pub struct CliError {
    pub kind: ExitKind,
    #[source]
    pub source: anyhow::Error,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.source)
    }
}

impl CliError {
    pub fn new(kind: ExitKind, source: impl Into<anyhow::Error>) -> Self {
        Self { kind, source: source.into() }
    }

    pub fn config(source: impl Into<anyhow::Error>) -> Self {
        Self::new(ExitKind::Config, source)
    }

    pub fn data(source: impl Into<anyhow::Error>) -> Self {
        Self::new(ExitKind::Data, source)
    }

    pub fn verification(source: impl Into<anyhow::Error>) -> Self {
        Self::new(ExitKind::Verification, source)
    }
}

/// Attaches an exit class to any fallible result.
pub trait WithExit<T> {
    fn or_exit(self, kind: ExitKind) -> Result<T, CliError>;
}

impl<T, E: Into<anyhow::Error>> WithExit<T> for Result<T, E> {
    fn or_exit(self, kind: ExitKind) -> Result<T, CliError> {
        self.map_err(|e| CliError::new(kind, e))
    }
}
