use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    /// A reward needed a strictly positive baseline loss and did not get one.
    #[error("invalid baseline: {0}")]
    InvalidBaseline(String),

    /// Raised by a [`TrainingEnvironment`](crate::TrainingEnvironment) implementation.
    #[error("environment error: {0}")]
    Environment(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// True for errors caused by user-supplied configuration rather than by a run.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}
