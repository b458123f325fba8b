//! Periodogram-driven harmonic regression ("FDPR" forecaster).
//!
//! The training window's periodogram picks the `m` Fourier frequencies with
//! the most power; a least-squares fit of an intercept plus a cosine and a
//! sine at each of them is then extrapolated, phase-consistently, over the
//! forecast horizon.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{rolling_origin_cv, CvConfig, Forecaster, TrainingData};
use crate::linalg::least_squares;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Periodogram {
    /// `j / n` for `j = 1..=n/2`.
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
}

impl Periodogram {
    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }
}

/// `I(j/n) = |sum_t (y_t - mean) e^{-2 pi i j t / n}|^2 / n`.
pub fn periodogram(y: &[f64]) -> Result<Periodogram> {
    let n = y.len();
    if n < 4 {
        return Err(Error::TooShort { needed: 4, got: n });
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = y.iter().map(|v| Complex::new(v - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    Ok(Periodogram {
        frequencies: (1..=half).map(|j| j as f64 / n as f64).collect(),
        power: (1..=half).map(|j| buf[j].norm_sqr() / n as f64).collect(),
    })
}

/// The `m` frequencies of largest power (ties to the lower frequency), in
/// ascending order.
pub fn top_m_frequencies(pg: &Periodogram, m: usize) -> Result<Vec<f64>> {
    if m > pg.len() {
        return Err(Error::Bounds(format!("m = {m} exceeds the {} periodogram ordinates", pg.len())));
    }
    let mut idx: Vec<usize> = (0..pg.len()).collect();
    idx.sort_by(|&a, &b| pg.power[b].total_cmp(&pg.power[a]).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = idx[..m].to_vec();
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|j| pg.frequencies[j]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicModel {
    pub m: usize,
    pub frequencies: Vec<f64>,
    pub cos_coef: Vec<f64>,
    /// Zero at the Nyquist frequency, where the sine vanishes on the grid.
    pub sin_coef: Vec<f64>,
    pub intercept: f64,
    /// Series index of the first training value; time is measured from here.
    pub origin: usize,
    pub n_train: usize,
}

impl HarmonicModel {
    /// Fitted value at series index `t`.
    pub fn value_at(&self, t: usize) -> f64 {
        let s = t as f64 - self.origin as f64;
        self.frequencies.iter().zip(self.cos_coef.iter().zip(&self.sin_coef)).fold(
            self.intercept,
            |acc, (f, (a, b))| {
                let w = 2.0 * PI * f * s;
                acc + a * w.cos() + b * w.sin()
            },
        )
    }
}

fn is_nyquist(f: f64) -> bool {
    (f - 0.5).abs() < 1e-12
}

/// Least squares of `y` on an intercept and a cosine/sine pair per frequency.
/// `y[0]` sits at series index `origin`.
pub fn fit_harmonics(y: &[f64], freqs: &[f64], origin: usize) -> Result<HarmonicModel> {
    let n = y.len();
    if 2 * freqs.len() + 1 > n {
        return Err(Error::TooShort { needed: 2 * freqs.len() + 1, got: n });
    }
    if let Some(f) = freqs.iter().find(|f| !(**f > 0.0 && **f <= 0.5 + 1e-12)) {
        return Err(Error::InvalidValue(format!("frequency {f} is outside (0, 0.5]")));
    }
    let mut names = vec!["intercept".to_string()];
    let mut cols = vec![vec![1.0; n]];
    for f in freqs {
        names.push(format!("cos({f})"));
        cols.push((0..n).map(|t| (2.0 * PI * f * t as f64).cos()).collect());
        if !is_nyquist(*f) {
            names.push(format!("sin({f})"));
            cols.push((0..n).map(|t| (2.0 * PI * f * t as f64).sin()).collect());
        }
    }
    let coef = least_squares(&cols, &names, y)?.coef;
    let mut at = 1;
    let mut cos_coef = Vec::with_capacity(freqs.len());
    let mut sin_coef = Vec::with_capacity(freqs.len());
    for f in freqs {
        cos_coef.push(coef[at]);
        at += 1;
        if is_nyquist(*f) {
            sin_coef.push(0.0);
        } else {
            sin_coef.push(coef[at]);
            at += 1;
        }
    }
    Ok(HarmonicModel {
        m: freqs.len(),
        frequencies: freqs.to_vec(),
        cos_coef,
        sin_coef,
        intercept: coef[0],
        origin,
        n_train: n,
    })
}

/// Values at series indices `from..from + h`; `from` must not precede the
/// end of the training window.
pub fn forecast_harmonics(model: &HarmonicModel, from: usize, h: usize) -> Result<Vec<f64>> {
    let end = model.origin + model.n_train;
    if from < end {
        return Err(Error::Bounds(format!("forecast start {from} precedes the training end {end}")));
    }
    Ok((from..from + h).map(|t| model.value_at(t)).collect())
}

/// Harmonic regression on the `m` strongest frequencies of each training
/// window.
#[derive(Debug, Clone, Copy)]
pub struct FdprForecaster {
    pub m: usize,
}

impl Forecaster for FdprForecaster {
    fn name(&self) -> String {
        format!("FDPR(m={})", self.m)
    }

    fn forecast(&self, train: &TrainingData<'_>, horizon: usize) -> Result<Vec<f64>> {
        let freqs = top_m_frequencies(&periodogram(train.y)?, self.m)?;
        let start = train.origin - train.y.len();
        let model = fit_harmonics(train.y, &freqs, start)?;
        forecast_harmonics(&model, train.origin, horizon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MSelectionRow {
    pub m: usize,
    pub avg_mse: f64,
    pub avg_mape: Option<f64>,
    pub failed_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MSelection {
    pub best_m: usize,
    pub table: Vec<MSelectionRow>,
}

/// Cross-validates the FDPR forecaster for each candidate `m` and picks the
/// lowest average MSE (ties to the smaller `m`).
pub fn select_m(y: &[f64], candidates: &[usize], cfg: &CvConfig) -> Result<MSelection> {
    if candidates.is_empty() {
        return Err(Error::InvalidValue("no candidate m values".into()));
    }
    cfg.validate(y.len())?;
    let max_m = cfg.initial_window / 2;
    if let Some(m) = candidates.iter().find(|m| **m == 0 || **m > max_m) {
        return Err(Error::Bounds(format!(
            "m = {m} must lie in 1..={max_m} (periodogram ordinates of the {}-value initial window)",
            cfg.initial_window
        )));
    }
    let table: Vec<MSelectionRow> = candidates
        .par_iter()
        .map(|&m| {
            let r = rolling_origin_cv(&FdprForecaster { m }, y, None, cfg)?;
            Ok(MSelectionRow { m, avg_mse: r.avg_mse, avg_mape: r.avg_mape, failed_folds: r.failed.len() })
        })
        .collect::<Result<_>>()?;
    let best_m = table
        .iter()
        .min_by(|a, b| a.avg_mse.total_cmp(&b.avg_mse).then(a.m.cmp(&b.m)))
        .map(|r| r.m)
        .expect("non-empty table");
    Ok(MSelection { best_m, table })
}
