//! Crate-wide error type and exit-code categories.

use crate::imagecore::Colorspace;

/// Coarse category used by callers (e.g. the CLI) to map errors onto
/// process exit codes: configuration mistakes vs. bad or missing data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Internal,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("expected {expected:?} input, got {actual:?}")]
    ColorspaceMismatch {
        expected: Colorspace,
        actual: Colorspace,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },

    #[error("image {width}x{height} is smaller than required {need_w}x{need_h}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        need_w: usize,
        need_h: usize,
    },

    #[error("plane {width}x{height} is smaller than the {kernel}x{kernel} filter kernel")]
    PlaneTooSmall {
        width: usize,
        height: usize,
        kernel: usize,
    },

    #[error("invalid image geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid codec settings: {0}")]
    InvalidCodecSettings(String),

    #[error("codec `{codec}` does not report separate y/z rates")]
    RatesUnavailable { codec: String },

    #[error("codec `{codec}` does not expose latent tensors")]
    LatentUnavailable { codec: String },

    #[error("codec failed at recompression step {step}: {source}")]
    RecompressStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("external codec `{command}` exited with {status}: {stderr}")]
    ExternalCodec {
        command: String,
        status: String,
        stderr: String,
    },

    #[error("malformed latent file: {0}")]
    MalformedLatent(String),

    #[error("empty input vector")]
    EmptyVector,

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite value in feature matrix at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },

    #[error("training data contains a single class; need at least two")]
    SingleClass,

    #[error("feature dimension mismatch: model expects {expected}, got {actual}")]
    FeatureDimMismatch { expected: usize, actual: usize },

    #[error("unsupported model format version {found} (supported: {supported})")]
    ModelVersion { found: u32, supported: u32 },

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("image id `{id}` appears in both train and test splits")]
    SplitLeakage { id: String },

    #[error("manifest references missing file: {0}")]
    MissingFile(String),

    #[error("{split} split is empty")]
    EmptySplit { split: String },

    #[error("no feature rows for entry `{entry_id}`")]
    FeatureRowsMissing { entry_id: String },

    #[error("image I/O error for {path}: {message}")]
    ImageIo { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            InvalidCodecSettings(_)
            | RatesUnavailable { .. }
            | LatentUnavailable { .. }
            | Manifest(_)
            | ModelVersion { .. }
            | FeatureDimMismatch { .. } => ErrorCategory::Config,
            ColorspaceMismatch { .. }
            | DimensionMismatch { .. }
            | ImageTooSmall { .. }
            | PlaneTooSmall { .. }
            | InvalidGeometry(_)
            | MalformedLatent(_)
            | EmptyVector
            | LengthMismatch { .. }
            | NonFiniteFeature { .. }
            | SingleClass
            | CorruptModel(_)
            | SplitLeakage { .. }
            | MissingFile(_)
            | EmptySplit { .. }
            | FeatureRowsMissing { .. }
            | ImageIo { .. }
            | ExternalCodec { .. } => ErrorCategory::Data,
            RecompressStep { source, .. } => source.category(),
            Io(_) | Json(_) | Csv(_) => ErrorCategory::Internal,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
