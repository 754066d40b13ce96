use crate::recurrence::Mode;
use crate::trainer::Checkpoint;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix dimension {dim} exceeds the eigensolver limit of {max}")]
    UnsupportedSize { dim: usize, max: usize },
    #[error("eigenvalue iteration failed to converge")]
    EigenConvergence,
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("degenerate geometry: every training point coincides with the anchor")]
    DegenerateGeometry,
    #[error("training point {point} falls in ring {ring}, beyond the configured total of {t_total}")]
    RingOutOfRange {
        point: usize,
        ring: usize,
        t_total: usize,
    },
    #[error("rollout horizon must be at least 1")]
    ZeroHorizon,
    #[error("operation requires a model in {required:?} mode")]
    WrongMode { required: Mode },
    #[error("non-finite gradient at parameter {index}")]
    NonFiniteGradient { index: usize },
    #[error("training diverged at iteration {iteration}; last finite checkpoint retained")]
    Divergence {
        iteration: usize,
        last: Box<Checkpoint>,
    },
    #[error("zero scale in normalization column {column}")]
    ZeroScale { column: usize },
    #[error("{path}: {message}")]
    DataFormat { path: String, message: String },
    #[error("{path}: missing required column {column:?}")]
    MissingColumn { path: String, column: String },
    #[error("{path}: no usable rows after dropping missing values")]
    NoRowsRetained { path: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
