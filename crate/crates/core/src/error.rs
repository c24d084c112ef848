use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A column is missing, unexpected, duplicated or of the wrong type.
    #[error("schema error: {0}")]
    Schema(String),

    /// A single cell failed to parse or violated a column invariant.
    /// `line` is 1-based and counts the header as line 1.
    #[error("row error at line {line}, column `{column}`: {message}")]
    Row {
        line: u64,
        column: String,
        message: String,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("gradient descent diverged (non-finite loss) with learning rate {learning_rate}")]
    Divergence { learning_rate: f64 },

    #[error("unboostable data: first weak learner has weighted error {error:.6} >= {bound:.6}")]
    Unboostable { error: f64, bound: f64 },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    /// A pipeline stage failed; `stage` names it.
    #[error("{stage} stage: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }
}
