use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter or argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A named inequality between exponents does not hold.
    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("coarsening is lossy: target level {target} is below level {level}")]
    Coarsening { level: i32, target: i32 },

    #[error("operation requires a nonzero function")]
    ZeroFunction,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("moment validation failed: {0}")]
    Moments(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("fixture error: {0}")]
    Fixture(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn constraint(msg: impl Into<String>) -> Error {
    Error::Constraint(msg.into())
}
