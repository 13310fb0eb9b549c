use std::path::PathBuf;

use crate::index::codec::CodecError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no documents")]
    NoDocuments,

    #[error("unsupported text encoding {0:?}")]
    UnsupportedEncoding(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Rank(String),

    #[error("empty query")]
    EmptyQuery,

    #[error("missing index {0}")]
    MissingIndex(String),

    #[error("manifest mismatch: {0}")]
    ManifestMismatch(String),

    #[error("corrupt index file {file}: {source}")]
    Codec {
        file: String,
        #[source]
        source: CodecError,
    },

    #[error("corrupt index file {file}: {message}")]
    Corrupt { file: String, message: String },

    #[error("{0}")]
    Bench(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
