use std::fmt;
use std::path::Path;

/// Failure of a command, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config keys or values. Exit status 2.
    Usage(String),
    /// Input that cannot be read, parsed or processed. Exit status 3.
    Data(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    /// Data error prefixed with the file it came from. Parse errors render
    /// as `path:line: message`.
    pub fn in_file(path: &Path, err: scenecut::Error) -> Self {
        match err {
            scenecut::Error::Parse { line, message } => {
                CliError::Data(format!("{}:{line}: {message}", path.display()))
            }
            other => CliError::Data(format!("{}: {other}", path.display())),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl From<scenecut::Error> for CliError {
    fn from(e: scenecut::Error) -> Self {
        match e {
            scenecut::Error::InvalidParameter(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
