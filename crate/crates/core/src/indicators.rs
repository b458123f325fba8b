//! Technical indicators used as exogenous covariates: ADX, EMA, MOM, ROC,
//! RSI and Williams %R.
//!
//! Every indicator returns one `Option<f64>` per input bar; `None` marks the
//! warm-up region where the indicator is not yet defined.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::BarSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndicatorKind {
    Adx,
    Ema,
    Mom,
    Roc,
    Rsi,
    Wpr,
}

impl IndicatorKind {
    pub const ALL: [IndicatorKind; 6] = [
        IndicatorKind::Adx,
        IndicatorKind::Ema,
        IndicatorKind::Mom,
        IndicatorKind::Roc,
        IndicatorKind::Rsi,
        IndicatorKind::Wpr,
    ];

    pub fn default_window(self) -> usize {
        match self {
            IndicatorKind::Adx | IndicatorKind::Rsi | IndicatorKind::Wpr => 14,
            IndicatorKind::Ema | IndicatorKind::Mom | IndicatorKind::Roc => 10,
        }
    }

    fn min_window(self) -> usize {
        match self {
            IndicatorKind::Adx | IndicatorKind::Rsi => 2,
            _ => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IndicatorKind::Adx => "ADX",
            IndicatorKind::Ema => "EMA",
            IndicatorKind::Mom => "MOM",
            IndicatorKind::Roc => "ROC",
            IndicatorKind::Rsi => "RSI",
            IndicatorKind::Wpr => "WPR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndicatorSpec {
    pub kind: IndicatorKind,
    pub window: usize,
}

impl IndicatorSpec {
    pub fn new(kind: IndicatorKind, window: usize) -> Result<Self> {
        if window < kind.min_window() {
            return Err(Error::InvalidValue(format!(
                "{} window must be >= {}, got {window}",
                kind.label(),
                kind.min_window()
            )));
        }
        Ok(Self { kind, window })
    }

    pub fn with_default_window(kind: IndicatorKind) -> Self {
        Self { kind, window: kind.default_window() }
    }

    /// All six indicators at their default windows.
    pub fn defaults() -> Vec<IndicatorSpec> {
        IndicatorKind::ALL.iter().map(|k| Self::with_default_window(*k)).collect()
    }

    /// Index of the first defined value.
    pub fn warmup(&self) -> usize {
        match self.kind {
            IndicatorKind::Ema | IndicatorKind::Wpr => self.window - 1,
            IndicatorKind::Mom | IndicatorKind::Roc | IndicatorKind::Rsi => self.window,
            IndicatorKind::Adx => 2 * self.window - 1,
        }
    }

    pub fn compute(&self, bars: &BarSeries) -> Vec<Option<f64>> {
        let close = bars.closes();
        match self.kind {
            IndicatorKind::Ema => ema(&close, self.window),
            IndicatorKind::Mom => mom(&close, self.window),
            IndicatorKind::Roc => roc(&close, self.window),
            IndicatorKind::Rsi => rsi(&close, self.window),
            IndicatorKind::Wpr => wpr(&bars.highs(), &bars.lows(), &close, self.window),
            IndicatorKind::Adx => adx(&bars.highs(), &bars.lows(), &close, self.window),
        }
    }
}

impl fmt::Display for IndicatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind.label(), self.window)
    }
}

impl FromStr for IndicatorSpec {
    type Err = Error;

    /// `name[:window]`, e.g. `adx:14` or `ema`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, window) = match s.trim().split_once(':') {
            Some((n, w)) => (n.trim(), Some(w.trim())),
            None => (s.trim(), None),
        };
        let kind = match name.to_ascii_lowercase().as_str() {
            "adx" | "adi" => IndicatorKind::Adx,
            "ema" => IndicatorKind::Ema,
            "mom" => IndicatorKind::Mom,
            "roc" => IndicatorKind::Roc,
            "rsi" => IndicatorKind::Rsi,
            "wpr" => IndicatorKind::Wpr,
            other => return Err(Error::InvalidValue(format!("unknown indicator `{other}`"))),
        };
        let window = match window {
            Some(w) => {
                w.parse::<usize>().map_err(|_| Error::InvalidValue(format!("bad window `{w}` for {}", kind.label())))?
            }
            None => kind.default_window(),
        };
        IndicatorSpec::new(kind, window)
    }
}

/// Parses a comma-separated list such as `adx:14,ema:10,mom`.
pub fn parse_indicator_list(s: &str) -> Result<Vec<IndicatorSpec>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

/// EMA with factor `2/(window+1)`, seeded by the simple mean of the first
/// `window` closes.
pub fn ema(close: &[f64], window: usize) -> Vec<Option<f64>> {
    let mut out = vec![None; close.len()];
    if window == 0 || close.len() < window {
        return out;
    }
    let alpha = 2.0 / (window as f64 + 1.0);
    let mut value = close[..window].iter().sum::<f64>() / window as f64;
    out[window - 1] = Some(value);
    for t in window..close.len() {
        value += alpha * (close[t] - value);
        out[t] = Some(value);
    }
    out
}

pub fn mom(close: &[f64], window: usize) -> Vec<Option<f64>> {
    (0..close.len()).map(|t| (window > 0 && t >= window).then(|| close[t] - close[t - window])).collect()
}

/// Percent rate of change; undefined where the reference close is zero.
pub fn roc(close: &[f64], window: usize) -> Vec<Option<f64>> {
    (0..close.len())
        .map(|t| {
            if window == 0 || t < window || close[t - window] == 0.0 {
                None
            } else {
                Some(100.0 * (close[t] - close[t - window]) / close[t - window])
            }
        })
        .collect()
}

/// Wilder's RSI. Zero average loss gives 100.
pub fn rsi(close: &[f64], window: usize) -> Vec<Option<f64>> {
    let mut out = vec![None; close.len()];
    if window == 0 || close.len() <= window {
        return out;
    }
    let w = window as f64;
    let change = |t: usize| close[t] - close[t - 1];
    let mut gain = (1..=window).map(|t| change(t).max(0.0)).sum::<f64>() / w;
    let mut loss = (1..=window).map(|t| (-change(t)).max(0.0)).sum::<f64>() / w;
    let value = |g: f64, l: f64| if l == 0.0 { 100.0 } else { 100.0 - 100.0 / (1.0 + g / l) };
    out[window] = Some(value(gain, loss));
    for t in window + 1..close.len() {
        let c = change(t);
        gain = (gain * (w - 1.0) + c.max(0.0)) / w;
        loss = (loss * (w - 1.0) + (-c).max(0.0)) / w;
        out[t] = Some(value(gain, loss));
    }
    out
}

/// Williams %R over a trailing window including the current bar. A flat
/// window (highest high equals lowest low) gives -50.
pub fn wpr(high: &[f64], low: &[f64], close: &[f64], window: usize) -> Vec<Option<f64>> {
    (0..close.len())
        .map(|t| {
            if window == 0 || t + 1 < window {
                return None;
            }
            let span = t + 1 - window..=t;
            let hh = high[span.clone()].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let ll = low[span].iter().copied().fold(f64::INFINITY, f64::min);
            if hh == ll {
                Some(-50.0)
            } else {
                Some(-100.0 * (hh - close[t]) / (hh - ll))
            }
        })
        .collect()
}

/// Wilder's average directional index, defined from index `2*window - 1`.
pub fn adx(high: &[f64], low: &[f64], close: &[f64], window: usize) -> Vec<Option<f64>> {
    let n = close.len();
    let mut out = vec![None; n];
    if window < 1 || n < 2 * window {
        return out;
    }
    let w = window as f64;
    let mut tr = vec![0.0; n];
    let mut plus_dm = vec![0.0; n];
    let mut minus_dm = vec![0.0; n];
    for t in 1..n {
        tr[t] = (high[t] - low[t]).max((high[t] - close[t - 1]).abs()).max((low[t] - close[t - 1]).abs());
        let up = high[t] - high[t - 1];
        let down = low[t - 1] - low[t];
        plus_dm[t] = if up > down && up > 0.0 { up } else { 0.0 };
        minus_dm[t] = if down > up && down > 0.0 { down } else { 0.0 };
    }

    let dx = |s_tr: f64, s_plus: f64, s_minus: f64| {
        let (pdi, mdi) = if s_tr > 0.0 { (100.0 * s_plus / s_tr, 100.0 * s_minus / s_tr) } else { (0.0, 0.0) };
        if pdi + mdi == 0.0 {
            0.0
        } else {
            100.0 * (pdi - mdi).abs() / (pdi + mdi)
        }
    };

    let mut dx_values = vec![0.0; n];
    let mut s_tr = 0.0;
    let mut s_plus = 0.0;
    let mut s_minus = 0.0;
    for t in 1..n {
        if t <= window {
            s_tr += tr[t];
            s_plus += plus_dm[t];
            s_minus += minus_dm[t];
        } else {
            s_tr = s_tr - s_tr / w + tr[t];
            s_plus = s_plus - s_plus / w + plus_dm[t];
            s_minus = s_minus - s_minus / w + minus_dm[t];
        }
        if t >= window {
            dx_values[t] = dx(s_tr, s_plus, s_minus);
        }
    }

    let first = 2 * window - 1;
    let mut value = dx_values[window..=first].iter().sum::<f64>() / w;
    out[first] = Some(value);
    for t in first + 1..n {
        value = (value * (w - 1.0) + dx_values[t]) / w;
        out[t] = Some(value);
    }
    out
}

/// Time-aligned covariate columns. Entries in each column's warm-up region
/// are NaN and rows before `valid_from` must not be used for estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    valid_from: usize,
}

impl ExogMatrix {
    /// Builds a matrix from columns that may contain leading NaNs; every value
    /// after the first all-defined row must be finite.
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Shape(format!("{} names for {} columns", names.len(), columns.len())));
        }
        let rows = columns.first().map_or(0, Vec::len);
        if let Some(c) = columns.iter().position(|c| c.len() != rows) {
            return Err(Error::Shape(format!("column `{}` has {} rows, expected {rows}", names[c], columns[c].len())));
        }
        let mut valid_from = 0;
        for (name, col) in names.iter().zip(&columns) {
            let first = col.iter().position(|v| v.is_finite()).unwrap_or(rows);
            if let Some(bad) = col[first..].iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidValue(format!(
                    "column `{name}` undefined at row {} after its warm-up",
                    first + bad
                )));
            }
            valid_from = valid_from.max(first);
        }
        Ok(Self { names, columns, valid_from })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn valid_from(&self) -> usize {
        self.valid_from
    }

    /// Row `t`, or `None` inside the warm-up region.
    pub fn row(&self, t: usize) -> Option<Vec<f64>> {
        (t >= self.valid_from && t < self.n_rows()).then(|| self.columns.iter().map(|c| c[t]).collect())
    }

    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> ExogMatrix {
        let columns: Vec<Vec<f64>> = self.columns.iter().map(|c| c[range.clone()].to_vec()).collect();
        ExogMatrix {
            names: self.names.clone(),
            valid_from: self.valid_from.saturating_sub(range.start).min(range.len()),
            columns,
        }
    }

    /// Subset of columns, by index, in the given order.
    pub fn select(&self, idx: &[usize]) -> ExogMatrix {
        let names: Vec<String> = idx.iter().map(|&j| self.names[j].clone()).collect();
        let columns: Vec<Vec<f64>> = idx.iter().map(|&j| self.columns[j].clone()).collect();
        ExogMatrix::from_columns(names, columns).expect("subset of a valid matrix is valid")
    }

    /// Shifts every column down by `lag` rows, so row `t` holds the values
    /// observed at `t - lag`.
    pub fn lagged(&self, lag: usize) -> ExogMatrix {
        let rows = self.n_rows();
        let columns = self
            .columns
            .iter()
            .map(|c| (0..rows).map(|t| if t >= lag { c[t - lag] } else { f64::NAN }).collect())
            .collect();
        ExogMatrix::from_columns(self.names.clone(), columns).expect("lagging preserves validity")
    }
}

/// Computes the requested indicator columns on `bars`.
pub fn build_exog(bars: &BarSeries, specs: &[IndicatorSpec]) -> Result<ExogMatrix> {
    if specs.is_empty() {
        return Err(Error::InvalidValue("at least one indicator is required".into()));
    }
    let mut names = Vec::with_capacity(specs.len());
    let mut columns = Vec::with_capacity(specs.len());
    for spec in specs {
        if spec.warmup() >= bars.len() {
            return Err(Error::Warmup { indicator: spec.to_string(), needed: spec.warmup() + 1, got: bars.len() });
        }
        names.push(spec.to_string());
        columns.push(spec.compute(bars).into_iter().map(|v| v.unwrap_or(f64::NAN)).collect());
    }
    ExogMatrix::from_columns(names, columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Bar, Granularity};
    use approx::assert_abs_diff_eq;
    use chrono::{DateTime, Utc};
    use proptest::prelude::*;

    fn defined(v: &[Option<f64>]) -> Vec<f64> {
        v.iter().flatten().copied().collect()
    }

    fn bars_from(high: &[f64], low: &[f64], close: &[f64]) -> BarSeries {
        let bars = (0..close.len())
            .map(|i| Bar {
                timestamp: DateTime::<Utc>::from_timestamp(86_400 * i as i64, 0).unwrap(),
                open: close[i].clamp(low[i], high[i]),
                high: high[i],
                low: low[i],
                close: close[i],
                volume: 1.0,
            })
            .collect();
        BarSeries::new(bars, Granularity::Daily).unwrap()
    }

    #[test]
    fn ema_cases() {
        assert!(ema(&[4.0; 6], 3).iter().skip(2).all(|v| *v == Some(4.0)));
        let e = ema(&[1.0, 2.0, 3.0, 4.0, 5.0], 2);
        assert_eq!(e[0], None);
        let vals = defined(&e);
        for (a, b) in vals.iter().zip([1.5, 2.5, 3.5, 4.5]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let c = [3.0, 1.0, 4.0, 1.0, 5.0];
        assert_eq!(defined(&ema(&c, 1)), c.to_vec());
        assert!(ema(&c, 6).iter().all(Option::is_none));
    }

    #[test]
    fn mom_cases() {
        assert!(defined(&mom(&[7.0; 5], 2)).iter().all(|v| *v == 0.0));
        assert_eq!(mom(&[10.0, 12.0, 15.0], 1), vec![None, Some(2.0), Some(3.0)]);
        let ramp: Vec<f64> = (0..20).map(|i| 3.0 + 0.5 * i as f64).collect();
        assert!(defined(&mom(&ramp, 4)).iter().all(|v| (*v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn roc_cases() {
        assert!(defined(&roc(&[7.0; 5], 2)).iter().all(|v| *v == 0.0));
        assert_eq!(roc(&[100.0, 110.0], 1)[1].map(|v| (v * 1e9).round() / 1e9), Some(10.0));
        let geo: Vec<f64> = (0..15).map(|i| 2.0 * 1.03f64.powi(i)).collect();
        let expect = 100.0 * (1.03f64.powi(3) - 1.0);
        assert!(defined(&roc(&geo, 3)).iter().all(|v| (*v - expect).abs() < 1e-9));
        assert_eq!(roc(&[0.0, 1.0], 1)[1], None);
    }

    #[test]
    fn rsi_monotone_extremes() {
        let up: Vec<f64> = (0..20).map(|i| i as f64 + 1.0).collect();
        let down: Vec<f64> = up.iter().rev().copied().collect();
        assert!(defined(&rsi(&up, 5)).iter().all(|v| *v == 100.0));
        assert!(defined(&rsi(&down, 5)).iter().all(|v| v.abs() < 1e-12));
        assert_eq!(rsi(&up, 5).iter().position(Option::is_some), Some(5));
    }

    #[test]
    fn rsi_hand_computed_wilder_table() {
        // 15 closes with alternating +2/-1 moves, window 4.
        let mut close = vec![50.0];
        for i in 0..14 {
            let last = *close.last().unwrap();
            close.push(if i % 2 == 0 { last + 2.0 } else { last - 1.0 });
        }
        // Seed over changes 1..=4: gains 2,0,2,0 -> 1.0; losses 0,1,0,1 -> 0.5.
        // Then Wilder: g = (3g + gain)/4, l = (3l + loss)/4.
        let mut expected = vec![None; 4];
        let (mut g, mut l) = (1.0f64, 0.5f64);
        expected.push(Some(100.0 - 100.0 / (1.0 + g / l)));
        for i in 5..15 {
            let (gain, loss) = if (i - 1) % 2 == 0 { (2.0, 0.0) } else { (0.0, 1.0) };
            g = (3.0 * g + gain) / 4.0;
            l = (3.0 * l + loss) / 4.0;
            expected.push(Some(100.0 - 100.0 / (1.0 + g / l)));
        }
        let got = rsi(&close, 4);
        assert_eq!(got[4].map(|v| (v * 1e6).round() / 1e6), Some(66.666667));
        for (a, b) in got.iter().zip(&expected) {
            match (a, b) {
                (Some(x), Some(y)) => assert_abs_diff_eq!(*x, *y, epsilon = 1e-12),
                (None, None) => {}
                _ => panic!("definedness mismatch"),
            }
        }
    }

    #[test]
    fn wpr_cases() {
        let high = [5.0, 6.0, 7.0];
        let low = [4.0, 5.0, 6.0];
        assert_eq!(wpr(&high, &low, &[4.5, 5.5, 7.0], 3)[2], Some(0.0));
        assert_eq!(wpr(&high, &low, &[4.5, 5.5, 4.0], 3)[2], Some(-100.0));
        assert_eq!(wpr(&[2.0; 3], &[2.0; 3], &[2.0; 3], 2), vec![None, Some(-50.0), Some(-50.0)]);
    }

    #[test]
    fn adx_flat_is_zero() {
        let a = adx(&[10.0; 30], &[10.0; 30], &[10.0; 30], 5);
        assert_eq!(a.iter().position(Option::is_some), Some(9));
        assert!(defined(&a).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn adx_uptrend_is_strong() {
        let close: Vec<f64> = (0..60).map(|i| 100.0 + i as f64).collect();
        let high: Vec<f64> = close.iter().map(|c| c + 0.5).collect();
        let low: Vec<f64> = close.iter().map(|c| c - 0.5).collect();
        let a = adx(&high, &low, &close, 14);
        assert_eq!(a.iter().position(Option::is_some), Some(27));
        assert!(defined(&a).iter().all(|v| *v > 25.0));
    }

    /// Straight transcription of the textbook tabulation: TR/+DM/-DM columns,
    /// running Wilder sums, DI, DX, then ADX as the mean of the first `w` DX
    /// values followed by Wilder's average.
    fn adx_table(high: &[f64], low: &[f64], close: &[f64], w: usize) -> Vec<Option<f64>> {
        let n = close.len();
        let mut rows: Vec<(f64, f64, f64)> = vec![(0.0, 0.0, 0.0)];
        for t in 1..n {
            let tr = [high[t] - low[t], (high[t] - close[t - 1]).abs(), (low[t] - close[t - 1]).abs()]
                .into_iter()
                .fold(0.0, f64::max);
            let up = high[t] - high[t - 1];
            let dn = low[t - 1] - low[t];
            rows.push((tr, if up > dn && up > 0.0 { up } else { 0.0 }, if dn > up && dn > 0.0 { dn } else { 0.0 }));
        }
        let mut dxs = vec![None; n];
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for t in 1..n {
            if t <= w {
                a += rows[t].0;
                b += rows[t].1;
                c += rows[t].2;
            } else {
                a = a * (w as f64 - 1.0) / w as f64 + rows[t].0;
                b = b * (w as f64 - 1.0) / w as f64 + rows[t].1;
                c = c * (w as f64 - 1.0) / w as f64 + rows[t].2;
            }
            if t >= w {
                let pdi = 100.0 * b / a;
                let mdi = 100.0 * c / a;
                dxs[t] = Some(100.0 * (pdi - mdi).abs() / (pdi + mdi));
            }
        }
        let mut out = vec![None; n];
        let first = 2 * w - 1;
        let seed: f64 = (w..=first).map(|t| dxs[t].unwrap()).sum::<f64>() / w as f64;
        out[first] = Some(seed);
        for t in first + 1..n {
            out[t] = Some((out[t - 1].unwrap() * (w as f64 - 1.0) + dxs[t].unwrap()) / w as f64);
        }
        out
    }

    #[test]
    fn adx_thirty_bar_fixture_matches_table() {
        let close: Vec<f64> = (0..30).map(|i| 50.0 + 3.0 * (i as f64 * 0.7).sin() + 0.2 * i as f64).collect();
        let high: Vec<f64> = close.iter().enumerate().map(|(i, c)| c + 0.4 + 0.1 * (i % 3) as f64).collect();
        let low: Vec<f64> = close.iter().enumerate().map(|(i, c)| c - 0.3 - 0.1 * (i % 4) as f64).collect();
        let got = adx(&high, &low, &close, 5);
        let want = adx_table(&high, &low, &close, 5);
        assert_eq!(got.iter().position(Option::is_some), Some(9));
        for (g, w) in got.iter().zip(&want) {
            match (g, w) {
                (Some(x), Some(y)) => assert_abs_diff_eq!(*x, *y, epsilon = 1e-10),
                (None, None) => {}
                _ => panic!("definedness mismatch"),
            }
        }
    }

    #[test]
    fn spec_parsing() {
        let specs = parse_indicator_list("adx:14,ema:10,mom").unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[2], IndicatorSpec::new(IndicatorKind::Mom, 10).unwrap());
        assert!("rsi:1".parse::<IndicatorSpec>().is_err());
        assert!("foo:3".parse::<IndicatorSpec>().is_err());
        assert_eq!("ADI:7".parse::<IndicatorSpec>().unwrap().kind, IndicatorKind::Adx);
    }

    #[test]
    fn build_exog_warmups() {
        let close = [10.0, 11.0, 12.0];
        let bars = bars_from(&[13.0; 3], &[9.0; 3], &close);
        let one = build_exog(&bars, &[IndicatorSpec::new(IndicatorKind::Mom, 1).unwrap()]).unwrap();
        assert_eq!((one.n_cols(), one.valid_from()), (1, 1));
        assert!(one.row(0).is_none());
        assert!(one.column(0)[0].is_nan());
        let two = build_exog(
            &bars,
            &[IndicatorSpec::new(IndicatorKind::Ema, 2).unwrap(), IndicatorSpec::new(IndicatorKind::Mom, 1).unwrap()],
        )
        .unwrap();
        assert_eq!(two.valid_from(), 1);
        let err = build_exog(&bars, &[IndicatorSpec::new(IndicatorKind::Adx, 2).unwrap()]).unwrap_err();
        assert!(matches!(err, Error::Warmup { ref indicator, .. } if indicator == "ADX(2)"));
    }

    #[test]
    fn adx_ema_mom_gives_three_columns() {
        let close: Vec<f64> = (0..60).map(|i| 400.0 + (i as f64 * 0.3).sin()).collect();
        let high: Vec<f64> = close.iter().map(|c| c + 0.5).collect();
        let low: Vec<f64> = close.iter().map(|c| c - 0.5).collect();
        let bars = bars_from(&high, &low, &close);
        let x = build_exog(&bars, &parse_indicator_list("adx,ema,mom").unwrap()).unwrap();
        assert_eq!(x.n_cols(), 3);
        assert_eq!(x.valid_from(), 27);
    }

    #[test]
    fn lag_and_slice() {
        let x = ExogMatrix::from_columns(vec!["a".into()], vec![vec![f64::NAN, 1.0, 2.0, 3.0]]).unwrap();
        let l = x.lagged(2);
        assert_eq!(l.valid_from(), 3);
        assert_eq!(l.column(0)[3], 1.0);
        let s = x.slice_rows(2..4);
        assert_eq!((s.valid_from(), s.n_rows()), (0, 2));
        assert!(ExogMatrix::from_columns(vec!["a".into()], vec![vec![1.0, f64::NAN]]).is_err());
    }

    fn price_path(steps: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut close = vec![100.0];
        for s in steps {
            let last = *close.last().unwrap();
            close.push((last * (1.0 + s)).max(1.0));
        }
        let high = close.iter().enumerate().map(|(i, c)| c * (1.0 + 0.002 * (1 + i % 5) as f64)).collect();
        let low = close.iter().enumerate().map(|(i, c)| c * (1.0 - 0.002 * (1 + i % 3) as f64)).collect();
        (high, low, close)
    }

    proptest! {
        #[test]
        fn scale_laws(steps in prop::collection::vec(-0.03f64..0.03, 40..80), c in 0.1f64..50.0) {
            let (h, l, cl) = price_path(&steps);
            let sc = |v: &[f64]| v.iter().map(|x| x * c).collect::<Vec<_>>();
            let (hs, ls, cs) = (sc(&h), sc(&l), sc(&cl));
            let close_enough = |a: &[Option<f64>], b: &[Option<f64>], k: f64| {
                a.iter().zip(b).all(|(x, y)| match (x, y) {
                    (Some(x), Some(y)) => (x * k - y).abs() <= 1e-9 * (1.0 + y.abs()),
                    (None, None) => true,
                    _ => false,
                })
            };
            prop_assert!(close_enough(&ema(&cl, 10), &ema(&cs, 10), c));
            prop_assert!(close_enough(&mom(&cl, 10), &mom(&cs, 10), c));
            prop_assert!(close_enough(&roc(&cl, 10), &roc(&cs, 10), 1.0));
            prop_assert!(close_enough(&rsi(&cl, 14), &rsi(&cs, 14), 1.0));
            prop_assert!(close_enough(&wpr(&h, &l, &cl, 14), &wpr(&hs, &ls, &cs, 14), 1.0));
            prop_assert!(close_enough(&adx(&h, &l, &cl, 7), &adx(&hs, &ls, &cs, 7), 1.0));
        }

        #[test]
        fn finite_window_indicators_shift_exactly(steps in prop::collection::vec(-0.03f64..0.03, 40..80), k in 1usize..15) {
            let (h, l, cl) = price_path(&steps);
            let full = [mom(&cl, 5), roc(&cl, 5), wpr(&h, &l, &cl, 5)];
            let shifted = [mom(&cl[k..], 5), roc(&cl[k..], 5), wpr(&h[k..], &l[k..], &cl[k..], 5)];
            for (f, s) in full.iter().zip(&shifted) {
                for (t, v) in s.iter().enumerate() {
                    if let Some(v) = v {
                        prop_assert_eq!(Some(*v), f[t + k]);
                    }
                }
            }
        }

        #[test]
        fn recursive_indicators_forget_their_start(steps in prop::collection::vec(-0.03f64..0.03, 400..420), k in 1usize..10) {
            let (h, l, cl) = price_path(&steps);
            let n = cl.len();
            let pairs = [
                (ema(&cl, 10), ema(&cl[k..], 10)),
                (rsi(&cl, 14), rsi(&cl[k..], 14)),
                (adx(&h, &l, &cl, 14), adx(&h[k..], &l[k..], &cl[k..], 14)),
            ];
            for (full, shifted) in pairs {
                let a = full[n - 1].unwrap();
                let b = shifted[n - 1 - k].unwrap();
                prop_assert!((a - b).abs() < 1e-6, "{} vs {}", a, b);
            }
        }

        #[test]
        fn warmup_is_never_filled(steps in prop::collection::vec(-0.03f64..0.03, 40..60)) {
            let (h, l, cl) = price_path(&steps);
            let bars = bars_from(&h, &l, &cl);
            for spec in IndicatorSpec::defaults() {
                let v = spec.compute(&bars);
                prop_assert_eq!(v.iter().position(Option::is_some), Some(spec.warmup()));
            }
        }
    }
}
