use std::path::PathBuf;

/// Errors raised by graph, context, inference and parsing operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown concept: {0}")]
    UnknownConcept(String),

    #[error("unknown association: {0}")]
    UnknownAssociation(u64),

    #[error("unknown alias: {0}")]
    UnknownAlias(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("nesting deeper than {width} slots at line {line}, column {column}")]
    DepthExceeded {
        width: usize,
        line: usize,
        column: usize,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A line-oriented input (annotation file, store file) failed at `line`.
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed record at line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn at_line(self, line: usize) -> Self {
        Error::AtLine {
            line,
            source: Box::new(self),
        }
    }

    /// True for the not-found family (concepts, associations).
    pub fn is_not_found(&self) -> bool {
        match self {
            Error::UnknownConcept(_) | Error::UnknownAssociation(_) => true,
            Error::AtLine { source, .. } => source.is_not_found(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
