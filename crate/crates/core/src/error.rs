use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical or numerical parameter is outside its allowed range.
    #[error("invalid value for `{key}`: {message}")]
    InvalidParameter { key: String, message: String },

    #[error("configuration {0} is not in the basis")]
    NotInBasis(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A numerical audit (unitarity, reconstruction, convergence) failed.
    #[error("{what} = {value:.3e} exceeds tolerance {tol:.3e}")]
    Tolerance { what: String, value: f64, tol: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("integration failed: {0}")]
    Integrator(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn tolerance(what: impl Into<String>, value: f64, tol: f64) -> Self {
        Error::Tolerance {
            what: what.into(),
            value,
            tol,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. }
            | Error::NotInBasis(_)
            | Error::DimensionMismatch(_)
            | Error::Empty(_)
            | Error::Config(_) => 3,
            Error::Tolerance { .. } | Error::Integrator(_) => 4,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
