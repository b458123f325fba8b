//! Exploratory statistics: sample ACF and PACF, and the classical additive
//! moving-average decomposition.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile used for the white-noise band.
const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelogramResult {
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
    /// Half-width of the white-noise band, `z / sqrt(n)`.
    pub band: f64,
}

impl CorrelogramResult {
    /// `lag,value,band` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "lag,value,band")?;
        for (lag, v) in self.lags.iter().zip(&self.values) {
            writeln!(out, "{lag},{v},{}", self.band)?;
        }
        Ok(())
    }
}

fn check_input(y: &[f64], max_lag: usize) -> Result<()> {
    if max_lag >= y.len() {
        return Err(Error::Bounds(format!("max_lag {max_lag} must be below the series length {}", y.len())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidValue("series contains non-finite values".into()));
    }
    if y.iter().all(|v| *v == y[0]) {
        return Err(Error::Degenerate("constant series has no autocorrelation".into()));
    }
    Ok(())
}

/// Sample autocorrelations `r_0..=r_L` with the biased `1/n` normalization.
pub(crate) fn autocorrelations(y: &[f64], max_lag: usize) -> Vec<f64> {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let e: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let c0: f64 = e.iter().map(|v| v * v).sum();
    (0..=max_lag).map(|k| e[k..].iter().zip(&e).map(|(a, b)| a * b).sum::<f64>() / c0).collect()
}

/// Partial autocorrelations from autocorrelations `rho[0..=L]` (`rho[0] = 1`)
/// by the Durbin-Levinson recursion. Entry 0 of the result is 1.
pub(crate) fn durbin_levinson(rho: &[f64]) -> Vec<f64> {
    let mut out = vec![1.0];
    let mut phi: Vec<f64> = Vec::new();
    for k in 1..rho.len() {
        let num = rho[k] - phi.iter().enumerate().map(|(j, p)| p * rho[k - 1 - j]).sum::<f64>();
        let den = 1.0 - phi.iter().enumerate().map(|(j, p)| p * rho[j + 1]).sum::<f64>();
        let kk = if den.abs() > 0.0 { num / den } else { 0.0 };
        let prev = phi.clone();
        for j in 0..phi.len() {
            phi[j] = prev[j] - kk * prev[prev.len() - 1 - j];
        }
        phi.push(kk);
        out.push(kk);
    }
    out
}

pub fn acf(y: &[f64], max_lag: usize) -> Result<CorrelogramResult> {
    check_input(y, max_lag)?;
    Ok(CorrelogramResult {
        lags: (0..=max_lag).collect(),
        values: autocorrelations(y, max_lag),
        band: Z95 / (y.len() as f64).sqrt(),
    })
}

pub fn pacf(y: &[f64], max_lag: usize) -> Result<CorrelogramResult> {
    check_input(y, max_lag)?;
    Ok(CorrelogramResult {
        lags: (0..=max_lag).collect(),
        values: durbin_levinson(&autocorrelations(y, max_lag)),
        band: Z95 / (y.len() as f64).sqrt(),
    })
}

/// Additive decomposition `y = trend + seasonal + irregular`.
///
/// Trend and irregular are undefined (`None`) within half a period of
/// either end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub period: usize,
    pub trend: Vec<Option<f64>>,
    pub seasonal: Vec<f64>,
    pub irregular: Vec<Option<f64>>,
}

/// Centered moving average of length `period` (a `2 x period` average with
/// half weights at the ends when `period` is even).
pub fn centered_moving_average(y: &[f64], period: usize) -> Vec<Option<f64>> {
    let n = y.len();
    let half = period / 2;
    (0..n)
        .map(|t| {
            if t < half || t + half >= n {
                return None;
            }
            let window = &y[t - half..=t + half];
            let s = if period % 2 == 1 {
                window.iter().sum::<f64>()
            } else {
                window.iter().sum::<f64>() - 0.5 * (window[0] + window[period])
            };
            Some(s / period as f64)
        })
        .collect()
}

pub fn decompose_moving_average(y: &[f64], period: usize) -> Result<Decomposition> {
    if period < 2 {
        return Err(Error::InvalidValue(format!("decomposition period must be >= 2, got {period}")));
    }
    if y.len() < 2 * period {
        return Err(Error::TooShort { needed: 2 * period, got: y.len() });
    }
    let trend = centered_moving_average(y, period);
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (t, tr) in trend.iter().enumerate() {
        if let Some(tr) = tr {
            sums[t % period] += y[t] - tr;
            counts[t % period] += 1;
        }
    }
    let phase: Vec<f64> = sums.iter().zip(&counts).map(|(s, c)| s / *c as f64).collect();
    let centre = phase.iter().sum::<f64>() / period as f64;
    let phase: Vec<f64> = phase.iter().map(|v| v - centre).collect();
    let seasonal: Vec<f64> = (0..y.len()).map(|t| phase[t % period]).collect();
    let irregular = trend.iter().zip(y.iter().zip(&seasonal)).map(|(tr, (v, s))| tr.map(|tr| v - tr - s)).collect();
    Ok(Decomposition { period, trend, seasonal, irregular })
}
