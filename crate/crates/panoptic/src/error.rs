//! Error types shared across the crate.

use std::path::PathBuf;

/// Coarse error class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Inconsistent arguments, geometry, or configuration. Exit code 1.
    Validation,
    /// Malformed or unreadable on-disk data. Exit code 2.
    Format,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected_h}x{expected_w}, got {got_h}x{got_w}")]
    DimensionMismatch {
        expected_h: u32,
        expected_w: u32,
        got_h: u32,
        got_w: u32,
    },

    #[error("bounding box ({x0},{y0})-({x1},{y1}) is invalid or outside a {width}x{height} image")]
    BoxOutOfBounds {
        x0: u32,
        y0: u32,
        x1: u32,
        y1: u32,
        width: u32,
        height: u32,
    },

    #[error("instance capacity exceeded: {0} instances of one class (limit 999)")]
    InstanceCapacity(u64),

    #[error("non-finite score encountered at pixel {pixel}, channel {channel}")]
    NonFiniteScore { pixel: usize, channel: usize },

    #[error("value out of range: {what} = {value}")]
    ValueOutOfRange { what: &'static str, value: f64 },

    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),

    #[error("class id {0} is not in the catalog")]
    UnknownClass(u32),

    #[error("class id {0} is not a {1} class")]
    WrongClassKind(u32, &'static str),

    #[error("catalog has no {0} classes")]
    MissingClassKind(&'static str),

    #[error("mask shape {mask_h}x{mask_w} does not match box extent {box_h}x{box_w}")]
    MaskShapeMismatch {
        mask_h: u32,
        mask_w: u32,
        box_h: u32,
        box_w: u32,
    },

    #[error("scene generation failed: {0}")]
    SceneGeneration(String),

    #[error("no prediction/ground-truth counterpart for stem `{0}`")]
    MissingCounterpart(String),

    #[error("input not found: {0}")]
    MissingInput(PathBuf),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bad magic bytes (expected `PSTF`)")]
    BadMagic,

    #[error("unsupported tensor format version {0}")]
    UnsupportedVersion(u16),

    #[error("unsupported tensor dtype {0}")]
    UnsupportedDtype(u8),

    #[error("payload size mismatch: expected {expected} bytes, got {actual}")]
    PayloadSize { expected: usize, actual: usize },

    #[error("segment id {0} does not fit the 24-bit raster encoding")]
    IdOverflow(u32),

    #[error("malformed panoptic raster: {0}")]
    MalformedRaster(String),

    #[error("raster/sidecar mismatch: {0}")]
    SidecarMismatch(String),

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("PNG error for {path}: {source}")]
    Png {
        path: PathBuf,
        source: image::ImageError,
    },

    #[error("I/O error for {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    /// Which exit-code class this error belongs to.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::DimensionMismatch { .. }
            | Error::BoxOutOfBounds { .. }
            | Error::InstanceCapacity(_)
            | Error::NonFiniteScore { .. }
            | Error::ValueOutOfRange { .. }
            | Error::InvalidCatalog(_)
            | Error::UnknownClass(_)
            | Error::WrongClassKind(..)
            | Error::MissingClassKind(_)
            | Error::MaskShapeMismatch { .. }
            | Error::SceneGeneration(_)
            | Error::MissingCounterpart(_)
            | Error::MissingInput(_)
            | Error::InvalidArgument(_) => ErrorKind::Validation,
            Error::BadMagic
            | Error::UnsupportedVersion(_)
            | Error::UnsupportedDtype(_)
            | Error::PayloadSize { .. }
            | Error::IdOverflow(_)
            | Error::MalformedRaster(_)
            | Error::SidecarMismatch(_)
            | Error::Json { .. }
            | Error::Png { .. }
            | Error::Io { .. } => ErrorKind::Format,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
