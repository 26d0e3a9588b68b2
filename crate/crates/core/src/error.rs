use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("unparsable file {path}: {reason}")]
    UnparsableFile { path: String, reason: String },

    #[error("{doc_id}: body has {lines} lines, minimum is {min}")]
    TooSmall { doc_id: String, lines: usize, min: usize },

    #[error("document {0} indexed twice")]
    DuplicateDoc(String),

    #[error("index format version {found} is not supported (expected {expected})")]
    FormatVersionMismatch { found: u32, expected: u32 },

    #[error("corrupt index: {0}")]
    CorruptIndex(String),

    #[error("index was built with n-gram sizes {index:?}, config requests {config:?}")]
    NgramMismatch { index: [usize; 4], config: [usize; 4] },

    #[error("query has no grams in any representation")]
    EmptyQuery,

    #[error("at least 4 projects are needed for quartiles, got {0}")]
    TooFewProjects(usize),

    #[error("no queries to average")]
    EmptyQuerySet,

    #[error("corpus contains no accepted answers")]
    EmptyCorpus,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid pattern `{name}`: {source}")]
    Pattern {
        name: String,
        #[source]
        source: regex::Error,
    },

    #[error("csv {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        if let csv::ErrorKind::Io(_) = source.kind() {
            let path = path.into();
            match source.into_kind() {
                csv::ErrorKind::Io(io) => return Error::Io { path, source: io },
                _ => unreachable!(),
            }
        }
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    pub fn schema(line: usize, message: impl Into<String>) -> Self {
        Error::Schema {
            line,
            message: message.into(),
        }
    }

    /// Process exit code for the command-line tool: 3 for I/O failures,
    /// 2 for malformed or unusable input data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            _ => 2,
        }
    }
}
