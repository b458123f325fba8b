//! Volume series representation and the differencing operators
//! `(1 - B)^d (1 - B^s)^D` with their inverse.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Non-negative volumes on strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeSeries {
    timestamps: Vec<DateTime<Utc>>,
    values: Vec<f64>,
}

impl VolumeSeries {
    pub fn new(timestamps: Vec<DateTime<Utc>>, values: Vec<f64>) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::Shape(format!("{} timestamps for {} values", timestamps.len(), values.len())));
        }
        if values.is_empty() {
            return Err(Error::TooShort { needed: 1, got: 0 });
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidValue(format!("timestamps not strictly increasing at index {}", i + 1)));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidValue(format!("volume at index {i} is {} (must be finite and >= 0)", values[i])));
        }
        Ok(Self { timestamps, values })
    }

    pub fn timestamps(&self) -> &[DateTime<Utc>] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Ordinary and seasonal differencing orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferenceSpec {
    pub d: usize,
    pub seasonal_d: usize,
    /// Seasonal period; 1 means no seasonal structure.
    pub period: usize,
}

impl DifferenceSpec {
    pub fn new(d: usize, seasonal_d: usize, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidValue("seasonal period must be >= 1".into()));
        }
        Ok(Self { d, seasonal_d, period })
    }

    pub fn none() -> Self {
        Self { d: 0, seasonal_d: 0, period: 1 }
    }

    /// Number of observations consumed: `d + D*s`.
    pub fn lost(&self) -> usize {
        self.d + self.seasonal_d * self.period
    }

    /// Coefficients `c` of `(1 - B)^d (1 - B^s)^D = sum_k c_k B^k`, with `c_0 = 1`.
    pub fn polynomial(&self) -> Vec<f64> {
        let mut poly = vec![1.0];
        for _ in 0..self.seasonal_d {
            poly = poly_mul(&poly, &lag_difference(self.period));
        }
        for _ in 0..self.d {
            poly = poly_mul(&poly, &lag_difference(1));
        }
        poly
    }
}

fn lag_difference(lag: usize) -> Vec<f64> {
    let mut p = vec![0.0; lag + 1];
    p[0] = 1.0;
    p[lag] = -1.0;
    p
}

pub(crate) fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn lagged_difference(y: &[f64], lag: usize) -> Vec<f64> {
    y.iter().skip(lag).zip(y).map(|(a, b)| a - b).collect()
}

/// Applies the seasonal difference `D` times, then the ordinary one `d` times.
/// Output length is `n - d - D*s`.
pub fn difference(y: &[f64], spec: &DifferenceSpec) -> Result<Vec<f64>> {
    if y.len() <= spec.lost() {
        return Err(Error::TooShort { needed: spec.lost() + 1, got: y.len() });
    }
    let mut out = y.to_vec();
    for _ in 0..spec.seasonal_d {
        out = lagged_difference(&out, spec.period);
    }
    for _ in 0..spec.d {
        out = lagged_difference(&out, 1);
    }
    Ok(out)
}

/// Inverse of [`difference`]: given the last `d + D*s` levels preceding the
/// first differenced value, rebuilds the levels for every differenced value.
///
/// `initial` may be longer than `d + D*s`; only its trailing values are read,
/// so the full history can be passed when extending a series with forecasts.
pub fn integrate(diffed: &[f64], spec: &DifferenceSpec, initial: &[f64]) -> Result<Vec<f64>> {
    let lost = spec.lost();
    if initial.len() < lost {
        return Err(Error::Shape(format!("integration needs {lost} initial values, got {}", initial.len())));
    }
    let poly = spec.polynomial();
    let mut history: Vec<f64> = initial[initial.len() - lost..].to_vec();
    history.reserve(diffed.len());
    for w in diffed {
        let t = history.len();
        let carried: f64 = poly.iter().enumerate().skip(1).map(|(k, c)| c * history[t - k]).sum();
        history.push(w - carried);
    }
    Ok(history.split_off(lost))
}
