//! Trading-volume forecasting with seasonal ARIMA models, technical-indicator
//! covariates and harmonic (periodogram) regression, plus the rolling-origin
//! evaluation harness used to compare them.

pub mod diagnostics;
pub mod error;
pub mod evaluation;
pub mod indicators;
pub mod ingest;
pub(crate) mod linalg;
pub(crate) mod optim;
pub mod sarimax;
pub mod series;
pub mod spectral;

pub use error::{Error, Result};
