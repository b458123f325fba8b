use serde::{Deserialize, Serialize};

use super::{Forecaster, TrainingData};
use crate::error::{Error, Result};
use crate::indicators::ExogMatrix;
use crate::sarimax::{auto_order_search, fit, forecast, Criterion, FitOptions, FittedModel, ModelOrder, SearchBounds};

/// How covariates are supplied for the forecast period, where they are not
/// yet observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FutureExogPolicy {
    /// Repeat the last observed row for every forecast step.
    #[default]
    Freeze,
    /// Regress on covariates lagged by the horizon, so that the rows needed
    /// for the forecast period are already observed.
    LagByHorizon,
}

/// Training inputs for the model (warm-up rows dropped) and the covariate
/// rows for the forecast period.
struct Prepared {
    y: Vec<f64>,
    x: Option<ExogMatrix>,
    x_future: Option<ExogMatrix>,
}

fn prepare(train: &TrainingData<'_>, horizon: usize, policy: FutureExogPolicy) -> Result<Prepared> {
    let Some(raw) = &train.exog else {
        return Ok(Prepared { y: train.y.to_vec(), x: None, x_future: None });
    };
    let n = train.y.len();
    let (x, future_cols): (ExogMatrix, Vec<Vec<f64>>) = match policy {
        FutureExogPolicy::Freeze => {
            let last = raw.row(n.saturating_sub(1)).ok_or_else(|| Error::Warmup {
                indicator: raw.names().join(","),
                needed: raw.valid_from() + 1,
                got: n,
            })?;
            (raw.clone(), last.iter().map(|v| vec![*v; horizon]).collect())
        }
        FutureExogPolicy::LagByHorizon => {
            if n < horizon {
                return Err(Error::TooShort { needed: horizon, got: n });
            }
            let future = raw.columns().iter().map(|c| c[n - horizon..].to_vec()).collect();
            (raw.lagged(horizon), future)
        }
    };
    let from = x.valid_from();
    if from >= n {
        return Err(Error::Warmup { indicator: x.names().join(","), needed: from + 1, got: n });
    }
    let x_future = ExogMatrix::from_columns(x.names().to_vec(), future_cols)?;
    Ok(Prepared { y: train.y[from..].to_vec(), x: Some(x.slice_rows(from..n)), x_future: Some(x_future) })
}

fn point_forecasts(model: &FittedModel, p: &Prepared, horizon: usize) -> Result<Vec<f64>> {
    Ok(forecast(model, &p.y, p.x.as_ref(), horizon, p.x_future.as_ref())?.into_iter().map(|f| f.mean).collect())
}

/// Fixed-order SARIMA(X) refitted on every training window.
#[derive(Debug, Clone)]
pub struct SarimaxForecaster {
    pub order: ModelOrder,
    pub options: FitOptions,
    pub exog_policy: FutureExogPolicy,
}

impl SarimaxForecaster {
    pub fn new(order: ModelOrder) -> Self {
        Self { order, options: FitOptions::default(), exog_policy: FutureExogPolicy::Freeze }
    }
}

impl Forecaster for SarimaxForecaster {
    fn name(&self) -> String {
        self.order.label()
    }

    fn forecast(&self, train: &TrainingData<'_>, horizon: usize) -> Result<Vec<f64>> {
        let p = prepare(train, horizon, self.exog_policy)?;
        let model = fit(&self.order, &p.y, p.x.as_ref(), &self.options)?;
        point_forecasts(&model, &p, horizon)
    }
}

/// Order search repeated on every training window.
#[derive(Debug, Clone)]
pub struct AutoSarimaxForecaster {
    pub bounds: SearchBounds,
    pub criterion: Criterion,
    pub options: FitOptions,
    pub exog_policy: FutureExogPolicy,
}

impl AutoSarimaxForecaster {
    pub fn new(bounds: SearchBounds) -> Self {
        Self {
            bounds,
            criterion: Criterion::Aic,
            options: FitOptions::default(),
            exog_policy: FutureExogPolicy::Freeze,
        }
    }
}

impl Forecaster for AutoSarimaxForecaster {
    fn name(&self) -> String {
        "best model at each origin".into()
    }

    fn forecast(&self, train: &TrainingData<'_>, horizon: usize) -> Result<Vec<f64>> {
        let p = prepare(train, horizon, self.exog_policy)?;
        let (model, _) = auto_order_search(&p.y, p.x.as_ref(), &self.bounds, self.criterion, &self.options)?;
        point_forecasts(&model, &p, horizon)
    }
}

/// Training-window mean.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanForecaster;

impl Forecaster for MeanForecaster {
    fn name(&self) -> String {
        "mean".into()
    }

    fn forecast(&self, train: &TrainingData<'_>, horizon: usize) -> Result<Vec<f64>> {
        if train.y.is_empty() {
            return Err(Error::TooShort { needed: 1, got: 0 });
        }
        let mean = train.y.iter().sum::<f64>() / train.y.len() as f64;
        Ok(vec![mean; horizon])
    }
}

/// Last observed value.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveForecaster;

impl Forecaster for NaiveForecaster {
    fn name(&self) -> String {
        "no change".into()
    }

    fn forecast(&self, train: &TrainingData<'_>, horizon: usize) -> Result<Vec<f64>> {
        let last = *train.y.last().ok_or(Error::TooShort { needed: 1, got: 0 })?;
        Ok(vec![last; horizon])
    }
}

/// Returns the true future values. Only useful to check the harness itself.
#[derive(Debug, Clone)]
pub struct OracleForecaster {
    series: Vec<f64>,
}

impl OracleForecaster {
    pub fn new(series: Vec<f64>) -> Self {
        Self { series }
    }
}

impl Forecaster for OracleForecaster {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn forecast(&self, train: &TrainingData<'_>, horizon: usize) -> Result<Vec<f64>> {
        self.series
            .get(train.origin..train.origin + horizon)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| Error::Bounds(format!("oracle has no values past index {}", self.series.len())))
    }
}
