use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: bad JSON, dangling references, invalid arguments.
    #[error("{path}: {message}")]
    Input { path: String, message: String },

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A predimension binding does not resolve against the structure.
    #[error("binding error: {0}")]
    Binding(String),

    /// An enumeration would exceed its configured budget.
    #[error("budget exceeded: {what} needs {required}, limit is {limit}")]
    Budget {
        what: String,
        required: u128,
        limit: u128,
    },

    #[error("timed out after {0} ms")]
    Timeout(u64),

    /// Operation is well-formed but not defined on these arguments.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computed object failed an internal consistency check.
    #[error("internal consistency error: {0}")]
    Consistency(String),
}

impl Error {
    pub fn input(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Input {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by malformed input rather than by the computation.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::Input { .. } | Error::Parse(_) | Error::Io(_) | Error::Binding(_)
        )
    }
}
