use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration or instance failed validation; one entry per offending field.
    #[error("invalid {what}: {}", .fields.join("; "))]
    Invalid {
        what: &'static str,
        fields: Vec<String>,
    },

    #[error("instance too large for exhaustive search: {requesters} requesters x {options} options exceeds 2^30 assignments")]
    TooLarge { requesters: usize, options: usize },

    #[error("infeasible assignment: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, fields: Vec<String>) -> Self {
        Error::Invalid { what, fields }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
