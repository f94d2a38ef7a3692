use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty vocabulary: no token reaches min_count={min_count} in any slice")]
    EmptyVocabulary { min_count: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("co-occurrence counts inconsistent: {0}")]
    InconsistentCounts(String),

    #[error("singular {dim}x{dim} system in slice {slice}; use a nonzero lambda")]
    SingularSystem { slice: usize, dim: usize },

    #[error("objective diverged at sweep {sweep} (last finite value {last_finite})")]
    Diverged { sweep: usize, last_finite: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("untrained/degenerate word: {0}")]
    DegenerateWord(String),

    #[error("word not in vocabulary: {word}{}", suggestion_suffix(.suggestions))]
    UnknownWord {
        word: String,
        suggestions: Vec<String>,
    },

    #[error("poles coincide: axis difference vector is zero")]
    PolesCoincide,

    #[error("CPI index missing for year(s) {0:?}")]
    MissingCpiYear(Vec<i32>),

    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("stale input: {0}")]
    Stale(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("output directory {0} is locked by another run")]
    Locked(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn suggestion_suffix(s: &[String]) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!(" (nearest spellings: {})", s.join(", "))
    }
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
