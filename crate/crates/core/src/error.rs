use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("vertex count {0} outside supported range 2..=6")]
    VertexCount(usize),
    #[error("invalid vertex pair ({u},{v}) for n={n}")]
    InvalidPair { u: usize, v: usize, n: usize },
    #[error("edge index {edge} out of range for n={n}")]
    EdgeOutOfRange { edge: usize, n: usize },
    #[error("edge {0} has already been asked")]
    EdgeAlreadyAsked(usize),
    #[error("class id {id} out of range (table has {len} classes)")]
    ClassOutOfRange { id: usize, len: usize },
    #[error("property is over n={found}, expected n={expected}")]
    VertexCountMismatch { expected: usize, found: usize },
    #[error("unknown builtin property `{0}`")]
    UnknownBuiltin(String),
    #[error("builtin `{name}` is not available for n={n}")]
    BuiltinUnavailable { name: String, n: usize },
    #[error("position is already decided")]
    AlreadyDecided,
    #[error("malformed document: {0}")]
    Parse(String),
    #[error("checkpoint format version {found} is not supported (expected {expected})")]
    CheckpointVersion { expected: u32, found: u32 },
    #[error("checkpoint mismatch: {0}")]
    CheckpointMismatch(String),
    #[error("could not draw a nontrivial monotone property after {0} attempts")]
    RetriesExhausted(usize),
    #[error("scan mode not supported here: {0}")]
    ScanMode(String),
    #[error("game: {0}")]
    Game(String),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
