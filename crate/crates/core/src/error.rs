use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("manifest not found: {0}")]
    ManifestNotFound(PathBuf),

    #[error("manifest schema violation in {path}: {field}: {message}")]
    SchemaViolation {
        path: PathBuf,
        field: String,
        message: String,
    },

    #[error("summary directory contains no supported images: {0}")]
    EmptySummaryDirectory(PathBuf),

    #[error("summary directory not found: {0}")]
    SummaryDirectoryNotFound(PathBuf),

    #[error("duplicate frame id {frame_id} in {dir}")]
    DuplicateFrameId { dir: PathBuf, frame_id: u64 },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(PathBuf),

    #[error("corrupt image {path}: {message}")]
    CorruptImage { path: PathBuf, message: String },

    #[error("image has no pixels")]
    EmptyImage,

    #[error("expected a {expected}x{expected} grid, got {width}x{height}")]
    WrongDimensions {
        expected: usize,
        width: usize,
        height: usize,
    },

    #[error("HSV coordinate out of range: h={h}, s={s}, v={v}")]
    HsvOutOfRange { h: f64, s: f64, v: f64 },

    #[error("feature vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("feature vector is not a normalized distribution (sum {sum})")]
    NonNormalized { sum: f64 },

    #[error("threshold {0} is outside (0, 1]")]
    InvalidThreshold(f64),

    #[error("summary {0} has no frames")]
    EmptySummary(String),

    #[error("nothing to aggregate")]
    EmptyAggregation,

    #[error("feature cache {path}: {message}")]
    Cache { path: PathBuf, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn schema(
        path: &std::path::Path,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::SchemaViolation {
            path: path.to_path_buf(),
            field: field.into(),
            message: message.into(),
        }
    }
}
