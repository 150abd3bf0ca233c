//! Error and warning types shared across the crate.

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

/// Fatal errors. Variant names double as the stable error class names printed
/// by the command-line tool.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("duplicate track id `{0}`")]
    DuplicateTrackId(String),
    #[error("no valid rows in corpus")]
    EmptyCorpus,
    #[error("need at least {needed} rows, got {got}")]
    InsufficientRows { needed: usize, got: usize },
    #[error("column `{0}` has zero variance")]
    DegenerateColumn(String),
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt audio file {path}: {detail}")]
    CorruptFile { path: PathBuf, detail: String },
    #[error("no beat detected (periodicity {strength:.4} below {threshold})")]
    NoBeat { strength: f64, threshold: f64 },
    #[error("signal too short: {0}")]
    TooShort(String),
    #[error("metadata file unreadable: {0}")]
    MissingMetadata(String),
    #[error("design matrix is singular: {0}")]
    SingularDesign(String),
    #[error("residual SSCP matrix is rank deficient")]
    RankDeficientE,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("insufficient class samples: {0}")]
    InsufficientClassSamples(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse error category, mapped to process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Numeric,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable class name of the error.
    pub fn class(&self) -> &'static str {
        match self {
            Error::MissingColumn(_) => "MissingColumn",
            Error::DuplicateTrackId(_) => "DuplicateTrackId",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::InsufficientRows { .. } => "InsufficientRows",
            Error::DegenerateColumn(_) => "DegenerateColumn",
            Error::UnsupportedFormat(_) => "UnsupportedFormat",
            Error::CorruptFile { .. } => "CorruptFile",
            Error::NoBeat { .. } => "NoBeat",
            Error::TooShort(_) => "TooShort",
            Error::MissingMetadata(_) => "MissingMetadata",
            Error::SingularDesign(_) => "SingularDesign",
            Error::RankDeficientE => "RankDeficientE",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::SingleClass => "SingleClass",
            Error::InsufficientClassSamples(_) => "InsufficientClassSamples",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Io { .. } => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidConfig(_) => ErrorCategory::Usage,
            Error::DegenerateColumn(_)
            | Error::SingularDesign(_)
            | Error::RankDeficientE
            | Error::NoBeat { .. } => ErrorCategory::Numeric,
            _ => ErrorCategory::Data,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A non-fatal condition worth reporting, e.g. a skipped row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub class: &'static str,
    pub detail: String,
}

impl Warning {
    pub fn new(class: &'static str, detail: impl Into<String>) -> Self {
        Self {
            class,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WARN {}: {}", self.class, self.detail)
    }
}
