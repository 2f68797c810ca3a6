use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category, used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Training,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("row {row}: {message}")]
    Format { row: usize, message: String },

    #[error("row {row}, column {column}: cannot parse {token:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        token: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("degenerate histogram: image has a single intensity level ({0})")]
    DegenerateHistogram(u8),

    #[error("image has no ink pixels")]
    EmptyContent,

    #[error("cannot stratify class {class:?}: {reason}")]
    Stratification { class: String, reason: String },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("degenerate covariance: all rows are identical")]
    DegenerateCovariance,

    #[error("label error: {0}")]
    Label(String),

    #[error("coding matrix generation failed: {0}")]
    Generation(String),

    #[error("boosting failed after {rounds_completed} completed rounds: {reason}")]
    BoostFailure {
        rounds_completed: usize,
        reason: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported archive format version {found} (supported: {supported})")]
    Version { found: u64, supported: u64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("run {run}, method {method:?}: {source}")]
    Experiment {
        run: usize,
        method: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(expected: usize, got: usize) -> Self {
        Error::Shape { expected, got }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::Range(_) | Error::Version { .. } => ErrorKind::Config,
            Error::DegenerateCovariance
            | Error::Label(_)
            | Error::Generation(_)
            | Error::BoostFailure { .. } => ErrorKind::Training,
            Error::File { source, .. } | Error::Experiment { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }
}
