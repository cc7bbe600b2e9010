use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no frames in {0}")]
    NoFrames(PathBuf),

    #[error("frame {path} is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    MixedDimensions {
        path: PathBuf,
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },

    #[error("unreadable image {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid interval [{start}, {end}]: {reason}")]
    InvalidInterval { start: f64, end: f64, reason: String },

    #[error("empty slice for interval [{start}, {end}]")]
    EmptySlice { start: f64, end: f64 },

    #[error("segment length mismatch: expected {expected} frames, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("frame dimension mismatch: expected {want_w}x{want_h}, got {got_w}x{got_h}")]
    DimensionMismatch {
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },

    #[error("invalid frame sequence: {0}")]
    InvalidSequence(String),

    #[error("unknown perturbation kind {0:?}")]
    UnknownKind(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("fast perturbation needs {needed} source frames after the segment start, only {available} available")]
    InsufficientContext { needed: usize, available: usize },

    #[error("shape {index} out of bounds: bbox {bbox:?} in {width}x{height} frame")]
    ShapeOutOfBounds {
        index: usize,
        bbox: [i64; 4],
        width: u32,
        height: u32,
    },

    #[error("shape placement failed after {attempts} attempts")]
    PlacementFailed { attempts: usize },

    #[error("video {id} too short: {reason}")]
    VideoTooShort { id: String, reason: String },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("not a permutation of 1..={n}: {values:?}")]
    NotPermutation { n: usize, values: Vec<usize> },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error("transcoder failed: {0}")]
    Transcoder(String),

    #[error("json error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
