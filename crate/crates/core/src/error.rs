use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced anywhere in the encode / index / evaluate pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("image decode failed: {0}")]
    Decode(String),

    #[error("empty image (zero width or height)")]
    EmptyImage,

    #[error("target side {0} is not a positive power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("map of {rows}x{cols} is not divisible by downsample factors d2={d2}, d1={d1}")]
    Indivisible {
        rows: usize,
        cols: usize,
        d1: usize,
        d2: usize,
    },

    #[error("cannot take the median of an empty vector")]
    EmptyVector,

    #[error("barcode length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("descriptor mismatch: index uses {index}, got {probe}")]
    ConfigMismatch { index: String, probe: String },

    #[error("malformed descriptor tag {0:?}")]
    BadConfigTag(String),

    #[error("index is empty")]
    EmptyIndex,

    #[error("duplicate image id {0:?}")]
    DuplicateId(String),

    #[error("not an index file (bad magic)")]
    BadMagic,

    #[error("unsupported index format version {0}")]
    UnsupportedVersion(u16),

    #[error("corrupt index file: {0}")]
    Corrupt(String),

    #[error("invalid IRMA code {code:?}: {reason}")]
    IrmaParse { code: String, reason: String },

    #[error("IRMA position out of range: axis {axis}, position {position}")]
    IrmaIndex { axis: usize, position: usize },

    #[error("invalid branch table: {0}")]
    BranchTable(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("missing label for {0:?}")]
    Unlabeled(String),

    #[error("zero denominator in suitability measure")]
    ZeroDenominator,

    #[error("usage: {0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end: 1 usage, 2 I/O, 3 data/format.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Io { .. } => 2,
            _ => 3,
        }
    }
}
