use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("line {line}: duplicate tweet_id {tweet_id:?}")]
    DuplicateTweet { line: usize, tweet_id: String },

    #[error("{what} requires a non-empty input")]
    EmptyInput { what: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("random baseline needs {needed} profiles but only {available} are available (deficit {})", needed - available)]
    InsufficientPool { needed: usize, available: usize },

    #[error("distributions have different bin edges")]
    MismatchedBins,

    #[error("config: {0}")]
    Config(String),

    #[error("missing input file {}", .0.display())]
    MissingFile(PathBuf),

    #[error("report is missing field `{0}`")]
    MissingField(&'static str),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn in_stage(self, stage: &str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage: stage.to_string(),
                source: Box::new(e),
            },
        }
    }
}
