//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by geometry, workload, mechanism, and analysis operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input in {context}")]
    NonFinite { context: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty database")]
    EmptyDatabase,

    #[error("universe index {index} out of range for universe of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("body is not full-dimensional: {0}")]
    DegenerateBody(String),

    #[error("body exceeds the unit ball: max point norm {norm}")]
    BodyNotInUnitBall { norm: f64 },

    #[error("point outside body: gauge {gauge}")]
    PointOutsideBody { gauge: f64 },

    #[error("vertex expansion too large: {0}")]
    ExpansionTooLarge(String),

    #[error("projection did not converge: duality gap {gap:e} after {iterations} iterations")]
    ProjectionNonConvergence { gap: f64, iterations: usize },

    #[error("sample complexity search exceeded cap {cap}")]
    SearchCapExceeded { cap: u64 },

    #[error("section enumeration too large: {0}")]
    SectionTooLarge(String),

    #[error("degenerate section: {0}")]
    DegenerateSection(String),

    #[error("linear program infeasible")]
    LpInfeasible,

    #[error("linear program unbounded")]
    LpUnbounded,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Coarse classification used by the CLI to map errors onto exit codes.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::NonFinite { .. }
                | Error::EmptyDatabase
                | Error::IndexOutOfRange { .. }
        )
    }

    pub fn is_numerical_error(&self) -> bool {
        matches!(
            self,
            Error::ProjectionNonConvergence { .. } | Error::SearchCapExceeded { .. }
        )
    }
}
