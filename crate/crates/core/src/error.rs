use std::path::PathBuf;

/// Broad failure class, used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numerical => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Data => "data",
            ErrorKind::Numerical => "numerical",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("no eligible funds remain after cleaning the window {start}..{end}")]
    NoEligibleFunds { start: String, end: String },

    #[error("design matrix is rank deficient: factor `{factor}` is collinear with earlier columns")]
    Singular { factor: String },

    #[error("degenerate design: column {column} is identically zero")]
    DegenerateColumn { column: usize },

    #[error("dimension mismatch for {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("mixture fit failed: no feasible grid point among {evaluated} evaluated")]
    FitFailed {
        evaluated: usize,
        trace: Vec<crate::mixture::GridPoint>,
    },

    #[error("simulation study failed: {failed} of {reps} replications failed")]
    StudyFailed { failed: usize, reps: usize },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Alignment(_)
            | Error::NoEligibleFunds { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidInput(_)
            | Error::NonFinite(_)
            | Error::Serialize(_) => ErrorKind::Data,
            Error::Singular { .. }
            | Error::DegenerateColumn { .. }
            | Error::Numerical(_)
            | Error::FitFailed { .. }
            | Error::StudyFailed { .. } => ErrorKind::Numerical,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
