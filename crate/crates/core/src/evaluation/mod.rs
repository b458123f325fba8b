//! Rolling-origin cross-validation, point-forecast metrics, VWAP tracking
//! error with naive baselines, and forward stepwise covariate selection.

mod forecasters;
mod stepwise;
mod vwap;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicators::ExogMatrix;

pub use forecasters::{
    AutoSarimaxForecaster, FutureExogPolicy, MeanForecaster, NaiveForecaster, OracleForecaster, SarimaxForecaster,
};
pub use stepwise::{forward_stepwise, StepwiseResult, TrailEntry};
pub use vwap::{
    baseline_vwap_no_change, baseline_vwap_rolling, group_by_iso_week, group_by_session, period_vwaps, vwap,
    vwap_error, vwap_errors_by_period, weekly_vwap_grouping, BaselinePoint, Period, PeriodError, WeeklyVwap,
};

/// Training data visible to a forecaster at one origin: everything strictly
/// before `origin`, nothing after.
#[derive(Debug, Clone)]
pub struct TrainingData<'a> {
    pub y: &'a [f64],
    /// Covariate rows aligned with `y`.
    pub exog: Option<ExogMatrix>,
    /// Index in the full series of the first value to forecast.
    pub origin: usize,
}

/// A model that can be trained on a window and forecast `horizon` steps.
pub trait Forecaster: Sync {
    fn name(&self) -> String;
    fn forecast(&self, train: &TrainingData<'_>, horizon: usize) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowPolicy {
    #[default]
    Expanding,
    Sliding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub horizon: usize,
    pub initial_window: usize,
    pub window_policy: WindowPolicy,
    /// Distance between consecutive origins.
    pub step: usize,
}

impl CvConfig {
    /// Expanding window with `step == horizon`.
    pub fn new(horizon: usize, initial_window: usize) -> Self {
        Self { horizon, initial_window, window_policy: WindowPolicy::Expanding, step: horizon }
    }

    /// Initial window at `fraction` of `n` observations.
    pub fn with_initial_fraction(n: usize, horizon: usize, fraction: f64) -> Self {
        Self::new(horizon, ((n as f64 * fraction).round() as usize).max(1))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.horizon == 0 || self.step == 0 || self.initial_window == 0 {
            return Err(Error::InvalidValue("horizon, step and initial window must be positive".into()));
        }
        if self.initial_window + self.horizon > n {
            return Err(Error::Bounds(format!(
                "initial window {} plus horizon {} exceeds series length {n}",
                self.initial_window, self.horizon
            )));
        }
        Ok(())
    }

    /// Forecast origins, in increasing order.
    pub fn origins(&self, n: usize) -> Vec<usize> {
        (self.initial_window..).step_by(self.step).take_while(|o| o + self.horizon <= n).collect()
    }

    fn train_start(&self, origin: usize) -> usize {
        match self.window_policy {
            WindowPolicy::Expanding => 0,
            WindowPolicy::Sliding => origin - self.initial_window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub origin: usize,
    pub forecasts: Vec<f64>,
    pub actuals: Vec<f64>,
    pub mse: f64,
    /// `None` when an actual value in the fold is zero.
    pub mape: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedFold {
    pub origin: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub forecaster: String,
    pub config: CvConfig,
    pub folds: Vec<FoldRecord>,
    pub failed: Vec<FailedFold>,
    pub avg_mse: f64,
    /// Mean over folds with a defined MAPE.
    pub avg_mape: Option<f64>,
}

impl CvReport {
    fn from_folds(
        forecaster: String,
        config: CvConfig,
        folds: Vec<FoldRecord>,
        failed: Vec<FailedFold>,
    ) -> Result<Self> {
        if folds.is_empty() {
            return Err(Error::NoFolds { failed: failed.len() });
        }
        let avg_mse = folds.iter().map(|f| f.mse).sum::<f64>() / folds.len() as f64;
        let mapes: Vec<f64> = folds.iter().filter_map(|f| f.mape).collect();
        let avg_mape = (!mapes.is_empty()).then(|| mapes.iter().sum::<f64>() / mapes.len() as f64);
        Ok(Self { forecaster, config, folds, failed, avg_mse, avg_mape })
    }

    /// `origin,step,forecast,actual,error` rows, one per forecast value.
    pub fn write_fold_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "origin,step,forecast,actual,error")?;
        for f in &self.folds {
            for (j, (p, a)) in f.forecasts.iter().zip(&f.actuals).enumerate() {
                writeln!(out, "{},{},{},{},{}", f.origin, j + 1, p, a, p - a)?;
            }
        }
        Ok(())
    }
}

fn check_lengths(pred: &[f64], actual: &[f64]) -> Result<()> {
    if pred.len() != actual.len() {
        return Err(Error::Shape(format!("{} predictions for {} actual values", pred.len(), actual.len())));
    }
    if pred.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    Ok(())
}

pub fn mse(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(pred, actual)?;
    Ok(pred.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum::<f64>() / pred.len() as f64)
}

/// Mean absolute percentage error as a fraction (0.1 for 10%).
pub fn mape(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(pred, actual)?;
    if let Some(index) = actual.iter().position(|a| *a == 0.0) {
        return Err(Error::ZeroActual { index });
    }
    Ok(pred.iter().zip(actual).map(|(p, a)| ((p - a) / a).abs()).sum::<f64>() / pred.len() as f64)
}

/// Evaluates `forecaster` at every origin of `cfg`. Folds whose forecaster
/// fails are listed in [`CvReport::failed`] and left out of the averages.
pub fn rolling_origin_cv(
    forecaster: &dyn Forecaster,
    y: &[f64],
    x: Option<&ExogMatrix>,
    cfg: &CvConfig,
) -> Result<CvReport> {
    let n = y.len();
    cfg.validate(n)?;
    if let Some(x) = x {
        if x.n_rows() != n {
            return Err(Error::Shape(format!("exogenous matrix has {} rows, series has {n}", x.n_rows())));
        }
    }
    let outcomes: Vec<std::result::Result<FoldRecord, FailedFold>> = cfg
        .origins(n)
        .into_par_iter()
        .map(|origin| {
            let start = cfg.train_start(origin);
            let train = TrainingData { y: &y[start..origin], exog: x.map(|x| x.slice_rows(start..origin)), origin };
            let fail = |e: Error| FailedFold { origin, error: e.to_string() };
            let forecasts = forecaster.forecast(&train, cfg.horizon).map_err(fail)?;
            if forecasts.len() != cfg.horizon || forecasts.iter().any(|v| !v.is_finite()) {
                return Err(FailedFold { origin, error: "forecaster returned a malformed forecast".into() });
            }
            let actuals = y[origin..origin + cfg.horizon].to_vec();
            let mse = mse(&forecasts, &actuals).map_err(fail)?;
            let mape = mape(&forecasts, &actuals).ok();
            Ok(FoldRecord { origin, forecasts, actuals, mse, mape })
        })
        .collect();
    let mut folds = Vec::new();
    let mut failed = Vec::new();
    for o in outcomes {
        match o {
            Ok(f) => folds.push(f),
            Err(f) => failed.push(f),
        }
    }
    CvReport::from_folds(forecaster.name(), *cfg, folds, failed)
}
