use thiserror::Error;

use crate::datasets::Label;
use crate::numkit::QpStatus;

pub type Result<T> = std::result::Result<T, SuError>;

#[derive(Debug, Error)]
pub enum SuError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("empty input")]
    EmptyInput,

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("insufficient data for class {class}: need {needed} point(s), have {available}")]
    InsufficientData {
        class: Label,
        needed: usize,
        available: usize,
    },

    #[error("degenerate class prior {pi_plus}: |2*pi_plus - 1| must be at least {guard}")]
    DegeneratePrior { pi_plus: f64, guard: f64 },

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("QP solver finished with status {status:?} (kkt residual {kkt_residual:e})")]
    Solver { status: QpStatus, kkt_residual: f64 },

    #[error("optimization diverged: {0}")]
    Diverged(String),

    #[error("no candidate could be trained: {0}")]
    NoViableCandidate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SuError {
    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SuError::DegeneratePrior { .. }
                | SuError::NotPositiveDefinite { .. }
                | SuError::Singular(_)
                | SuError::Solver { .. }
                | SuError::Diverged(_)
                | SuError::NoViableCandidate(_)
        )
    }
}
