use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("pole error: {0}")]
    Pole(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("accuracy error: {message} (partial value {partial:e}, error estimate {estimate:e})")]
    Accuracy {
        message: String,
        partial: f64,
        estimate: f64,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("line {line}: {message}")]
    Spec { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn accuracy(msg: impl Into<String>, partial: f64, estimate: f64) -> Self {
        Error::Accuracy {
            message: msg.into(),
            partial,
            estimate,
        }
    }

    /// True for failures that mean "computed, but not to the requested accuracy".
    pub fn is_accuracy(&self) -> bool {
        matches!(self, Error::Accuracy { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
