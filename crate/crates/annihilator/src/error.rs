use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    /// `message` already carries the position.
    #[error("malformed JSON: {message}")]
    Json {
        message: String,
        line: usize,
        column: usize,
    },
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl InputError {
    pub(crate) fn from_json(e: serde_json::Error) -> Self {
        InputError::Json {
            message: e.to_string(),
            line: e.line(),
            column: e.column(),
        }
    }
}

/// Failure while writing reports or samples.
#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("grid needs at least 2 points, got {0}")]
    Grid(usize),
}
