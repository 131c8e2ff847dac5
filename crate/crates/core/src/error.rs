use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("scaled count {name}={count} is not an integer at scale {scale}")]
    NonIntegralScale {
        name: &'static str,
        count: u64,
        scale: String,
    },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("target efficiency {target} out of adaptation range: achievable beta is [{min_beta:.6}, {max_beta:.6}]")]
    OutOfAdaptationRange {
        target: f64,
        min_beta: f64,
        max_beta: f64,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate edge at row {row}, column {col}")]
    DuplicateEdge { row: usize, col: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unphysical parameters: {0}")]
    Unphysical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
