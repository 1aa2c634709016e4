//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by estimation, solving and I/O routines.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix sequence is not Hermitian (max defect {defect:.3e}, tolerance {tol:.1e})")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("max_lag {max_lag} must be < sample count {n}")]
    MaxLagTooLarge { max_lag: usize, n: usize },

    #[error("ACF covers lags up to {acf_max_lag} but the window has support radius {window_radius}")]
    WindowAcfMismatch {
        window_radius: usize,
        acf_max_lag: usize,
    },

    #[error("index set is not closed under transposition")]
    SupportNotTransposeClosed,

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("filter transfer function vanishes at frequency bin {bin}")]
    SingularTransfer { bin: usize },

    #[error("edge set is empty")]
    EmptyEdgeSet,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("bad file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CoreError {
    /// True for failures of the numerics themselves, as opposed to bad
    /// inputs or I/O. The CLI maps these to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            CoreError::NotPositiveDefinite(_)
                | CoreError::SingularTransfer { .. }
                | CoreError::NonFinite(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
