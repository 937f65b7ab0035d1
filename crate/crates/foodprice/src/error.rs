//! Crate-wide error type.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failures the toolkit can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("schema error: missing column {column:?}")]
    MissingColumn { column: String },

    #[error("schema error: duplicate year {year}")]
    DuplicateYear { year: i64 },

    #[error("parse error at row {row}, column {column:?}: {token:?} is not numeric")]
    BadCell {
        row: usize,
        column: String,
        token: String,
    },

    #[error("column {feature:?} has no observed values")]
    EmptyColumn { feature: String },

    #[error("{context}: need at least {needed} samples, got {got}")]
    TooFewSamples {
        context: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("zero variance in {name:?}")]
    ZeroVariance { name: String },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("singular design matrix (column {column} is linearly dependent)")]
    SingularDesign { column: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("fold count {k} invalid for {n} rows")]
    InvalidFolds { k: usize, n: usize },

    #[error("undefined R²: target has zero variance")]
    UndefinedR2,

    #[error("fold {fold}: {source}")]
    FoldFailed {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("missing artifact {path:?}; run the upstream stage first")]
    MissingArtifact { path: PathBuf },

    #[error("stage {stage} failed: {source}")]
    StageFailed {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 config, 3 data, 4 stage failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParam(_) => 2,
            Error::MissingColumn { .. }
            | Error::DuplicateYear { .. }
            | Error::BadCell { .. }
            | Error::EmptyColumn { .. }
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::MissingArtifact { .. } => 3,
            // Config and data problems keep their codes through the stage
            // wrapper; everything else is a stage failure.
            Error::StageFailed { source, .. } => match source.exit_code() {
                2 => 2,
                3 => 3,
                _ => 4,
            },
            _ => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::StageFailed {
            stage,
            source: Box::new(self),
        }
    }
}
