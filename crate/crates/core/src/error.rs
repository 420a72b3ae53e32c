use std::path::PathBuf;

use thiserror::Error;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input data, bad files, bad parameters.
    Data,
    /// A numerical routine failed on otherwise valid input.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fewer than 2 frames in {0}")]
    FewerThanTwoFrames(PathBuf),

    #[error("geometry mismatch: expected {expected}, got {found}")]
    GeometryMismatch { expected: String, found: String },

    #[error("degenerate sequence: all frames are identical")]
    DegenerateSequence,

    #[error("insufficient frames: need {needed}, have {available}")]
    InsufficientFrames { needed: usize, available: usize },

    #[error("empty comparison range")]
    EmptyComparison,

    #[error("frame {width}x{height} is smaller than the {window}x{window} SSIM window")]
    FrameTooSmall {
        width: usize,
        height: usize,
        window: usize,
    },

    #[error("n out of range: state dimension {n} not in 1..={max}")]
    StateDimOutOfRange { n: usize, max: usize },

    #[error("invalid kernel spec {spec:?}: {reason}")]
    KernelSpec { spec: String, reason: String },

    #[error("matrix not positive definite; increase lambda")]
    NotPositiveDefinite,

    #[error("svd did not converge after {0} sweeps")]
    SvdNoConvergence(usize),

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    #[error("truncated model file: {0}")]
    Truncated(&'static str),

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt model file: {0}")]
    Corrupt(String),

    #[error("cannot decode {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotPositiveDefinite | Error::SvdNoConvergence(_) | Error::NonFinite(_) => {
                ErrorClass::Numerical
            }
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
