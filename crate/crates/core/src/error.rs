use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong between reading a CSV and printing a fit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: {} rejected row(s), first: {}", .errors.len(), .errors.first().map(|e| e.to_string()).unwrap_or_default())]
    Rows {
        path: PathBuf,
        errors: Vec<crate::data::RowError>,
    },

    #[error("unknown field-test schema `{0}` (expected illinois or kentucky)")]
    UnknownSchema(String),

    #[error("corrupt manifest: {0}")]
    Manifest(String),

    #[error("dataset schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("control variety `{control}` absent in region `{region}`")]
    ControlAbsent { region: String, control: String },

    #[error("no publication year for patent {0}")]
    MissingYear(String),

    #[error("citation network contains a cycle through {0}")]
    Cycle(String),

    #[error("design matrix is rank deficient (column `{0}`)")]
    RankDeficient(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    ///
    /// 2 = input error, 3 = data or precondition error, 4 = numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Csv { .. }
            | Error::MissingColumn { .. }
            | Error::Rows { .. }
            | Error::UnknownSchema(_)
            | Error::Manifest(_)
            | Error::SchemaVersion { .. }
            | Error::InvalidInput(_)
            | Error::Json(_) => 2,
            Error::InsufficientData(_) | Error::ControlAbsent { .. } | Error::MissingYear(_) | Error::Cycle(_) => 3,
            Error::RankDeficient(_) | Error::Numeric(_) => 4,
        }
    }

    /// Short machine-readable tag for error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::MissingColumn { .. } => "missing_column",
            Error::Rows { .. } => "rows",
            Error::UnknownSchema(_) => "unknown_schema",
            Error::Manifest(_) => "manifest",
            Error::SchemaVersion { .. } => "schema_version",
            Error::InvalidInput(_) => "invalid_input",
            Error::InsufficientData(_) => "insufficient_data",
            Error::ControlAbsent { .. } => "control_absent",
            Error::MissingYear(_) => "missing_year",
            Error::Cycle(_) => "cycle",
            Error::RankDeficient(_) => "rank_deficient",
            Error::Numeric(_) => "numeric",
            Error::Json(_) => "json",
        }
    }
}
