use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("numeric error: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    #[error(
        "extraction error: {interior} interior eigenvalues but the atom masses require {expected}"
    )]
    Extraction { interior: usize, expected: usize },

    #[error("unsupported function: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numeric {
            message: msg.into(),
            residual,
        }
    }
}
