//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::sarimax::FittedModel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A series is too short for the requested operation.
    #[error("series too short: need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },

    /// Inputs that must share a length (or a declared shape) do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("timestamps not strictly increasing at line {line}")]
    Ordering { line: usize },

    #[error("incomplete sessions on {} date(s), first {first}", dates.len())]
    IncompleteSessions { first: String, dates: Vec<String> },

    #[error("design matrix is collinear at column `{column}`")]
    Collinear { column: String },

    /// Parameters outside the stationary / invertible region.
    #[error("parameters outside the admissible region: {0}")]
    Domain(String),

    #[error("optimizer did not converge after {restarts} restarts")]
    Convergence { restarts: usize, best: Box<FittedModel> },

    #[error("model has {expected} exogenous regressors but {got} future rows were supplied for horizon {horizon}")]
    ExogHorizon { expected: usize, got: usize, horizon: usize },

    #[error("order search failed: every candidate fit failed ({})", failures.join("; "))]
    Search { failures: Vec<String> },

    #[error("out of bounds: {0}")]
    Bounds(String),

    /// MAPE is undefined when an actual value is zero.
    #[error("actual value is zero at index {index}")]
    ZeroActual { index: usize },

    #[error("total volume is zero")]
    ZeroVolume,

    /// Zero-variance input where a correlation is requested.
    #[error("degenerate series: {0}")]
    Degenerate(String),

    #[error("indicator {indicator} needs {needed} bars of warm-up, series has {got}")]
    Warmup { indicator: String, needed: usize, got: usize },

    #[error("cross-validation produced no successful folds ({failed} failed)")]
    NoFolds { failed: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
