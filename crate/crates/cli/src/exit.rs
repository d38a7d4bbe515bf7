use std::fmt;

/// Process exit codes of the `pacing` binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    /// The outcome failed verification, or no verified equilibrium was found.
    VerifyFailed = 1,
    /// Malformed arguments or input files.
    Parse = 2,
    /// The solver hit its time limit; partial results were written.
    Timeout = 3,
    Io = 4,
    /// Any other failure.
    Failure = 5,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// An error tagged with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn new(exit: Exit, source: impl Into<anyhow::Error>) -> Self {
        Self {
            exit,
            source: source.into(),
        }
    }

    pub fn parse(msg: impl fmt::Display) -> Self {
        Self::new(Exit::Parse, anyhow::anyhow!("{msg}"))
    }

    pub fn failure(msg: impl fmt::Display) -> Self {
        Self::new(Exit::Failure, anyhow::anyhow!("{msg}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.source)
    }
}

impl std::error::Error for CliError {}

impl From<pacing_core::Error> for CliError {
    fn from(e: pacing_core::Error) -> Self {
        use pacing_core::Error::*;
        let exit = match e {
            Json(_) | Dimension(_) | InvalidInstance(_) | NonFinite(_) | Formula(_) => Exit::Parse,
            _ => Exit::Failure,
        };
        Self::new(exit, e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(Exit::Io, e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        let exit = if e.is_io_error() {
            Exit::Io
        } else {
            Exit::Parse
        };
        Self::new(exit, e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        let exit = if e.is_io() { Exit::Io } else { Exit::Parse };
        Self::new(exit, e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
