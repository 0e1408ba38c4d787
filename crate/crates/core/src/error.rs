use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the range an algorithm has been validated on.
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// A radial function violates `0 < q < 1` on the sampled circle.
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    /// Precondition violated by the caller (bad sizes, empty inputs, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A root bracket or fit failed; indicates a bug or a bad seed.
    #[error("internal numerical failure: {0}")]
    Internal(String),

    /// A linear solve or iteration did not produce a usable answer.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The Levenberg-Marquardt normal matrix could not be factored.
    #[error("regularization failure: {0}")]
    Regularization(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("experiment {name} failed: {source}")]
    Experiment {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            func,
            msg: msg.into(),
        }
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::InvalidShape(_) => "invalid_shape",
            Error::InvalidInput(_) => "invalid_input",
            Error::Internal(_) => "internal",
            Error::Numerical(_) => "numerical",
            Error::Regularization(_) => "regularization",
            Error::Config(_) => "config",
            Error::Experiment { source, .. } => source.kind(),
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
