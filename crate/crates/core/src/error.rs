//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("every design column has zero variance; nothing to fit")]
    UnusableDesign,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("series too short: need at least lags + 2 rows, got {rows} rows for {lags} lags")]
    SeriesTooShort { rows: usize, lags: usize },

    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("degenerate folds: {0}")]
    DegenerateFolds(String),
}

pub type Result<T> = std::result::Result<T, Error>;
