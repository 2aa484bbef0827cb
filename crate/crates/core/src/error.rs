use std::io;

use thiserror::Error;

/// Errors produced by the generators, loaders and harness.
///
/// Every variant belongs to one of four categories (see [`ErrorKind`]), which
/// the command line maps onto its exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or generator parameter outside its valid domain.
    #[error("parameter error: {0}")]
    Param(String),

    /// An invalid schema, model file or plan. `path` locates the offending field.
    #[error("configuration error at {path}: {message}")]
    Config { path: String, message: String },

    /// Input data that does not follow its declared layout.
    #[error("format error: {0}")]
    Format(String),

    /// A conversion between two formats that cannot represent the data.
    #[error("unsupported conversion: {0}")]
    Unsupported(String),

    /// A model or schema file that cannot be read or does not validate.
    #[error("cannot load model {path}: {source}")]
    Model {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error{}: {source}", context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    Io {
        context: Option<String>,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    /// Unloadable model or schema; reported with the configuration exit code.
    Model,
    Io,
    Param,
}

impl ErrorKind {
    /// Process exit status used by the command line for this category.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config | ErrorKind::Model => 2,
            ErrorKind::Io => 3,
            ErrorKind::Param => 4,
        }
    }
}

impl Error {
    pub fn param(message: impl Into<String>) -> Self {
        Error::Param(message.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io_at(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            context: Some(context.into()),
            source,
        }
    }

    pub fn model(path: impl Into<String>, source: Error) -> Self {
        Error::Model {
            path: path.into(),
            source: Box::new(source),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Param(_) => ErrorKind::Param,
            Error::Config { .. } | Error::Format(_) | Error::Unsupported(_) => ErrorKind::Config,
            Error::Model { .. } => ErrorKind::Model,
            Error::Io { .. } => ErrorKind::Io,
        }
    }
}

impl From<io::Error> for Error {
    fn from(source: io::Error) -> Self {
        Error::Io {
            context: None,
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
