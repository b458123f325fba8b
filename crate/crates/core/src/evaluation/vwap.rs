use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{BarSeries, SessionCalendar};

/// `sum p_i v_i / sum v_i`.
pub fn vwap(prices: &[f64], volumes: &[f64]) -> Result<f64> {
    if prices.len() != volumes.len() {
        return Err(Error::Shape(format!("{} prices for {} volumes", prices.len(), volumes.len())));
    }
    let total: f64 = volumes.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroVolume);
    }
    Ok(prices.iter().zip(volumes).map(|(p, v)| p * v).sum::<f64>() / total)
}

/// Relative VWAP tracking error of predicted volumes, with prices taken as
/// known: `(VWAP(p, pred) - VWAP(p, actual)) / VWAP(p, actual)`.
pub fn vwap_error(pred_volumes: &[f64], actual_volumes: &[f64], prices: &[f64]) -> Result<f64> {
    let predicted = vwap(prices, pred_volumes)?;
    let realized = vwap(prices, actual_volumes)?;
    Ok((predicted - realized) / realized)
}

/// A contiguous run of bars: one session or one week.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

impl Period {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

fn group_by<K: PartialEq>(n: usize, key: impl Fn(usize) -> K, label: impl Fn(&K) -> String) -> Vec<Period> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < n {
        let k = key(start);
        let mut end = start + 1;
        while end < n && key(end) == k {
            end += 1;
        }
        out.push(Period { label: label(&k), start, end });
        start = end;
    }
    out
}

/// One period per exchange-local session date.
pub fn group_by_session(bars: &BarSeries, cal: &SessionCalendar) -> Vec<Period> {
    let b = bars.bars();
    group_by(b.len(), |i| cal.session_date(&b[i], bars.granularity()), |d| d.to_string())
}

/// One period per ISO week, labelled like `2024-W05`.
pub fn group_by_iso_week(bars: &BarSeries) -> Vec<Period> {
    let b = bars.bars();
    group_by(
        b.len(),
        |i| {
            let w = b[i].timestamp.date_naive().iso_week();
            (w.year(), w.week())
        },
        |(y, w)| format!("{y}-W{w:02}"),
    )
}

/// Realized VWAP of each period from bar closes and volumes.
pub fn period_vwaps(bars: &BarSeries, periods: &[Period]) -> Result<Vec<f64>> {
    let closes = bars.closes();
    let volumes = bars.volumes();
    periods.iter().map(|p| vwap(&closes[p.start..p.end], &volumes[p.start..p.end])).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselinePoint {
    pub period: usize,
    pub predicted: f64,
    pub actual: f64,
    /// `(predicted - actual) / actual`.
    pub error: f64,
}

/// Predicts each period's VWAP as the previous period's.
pub fn baseline_vwap_no_change(vwaps: &[f64]) -> Vec<BaselinePoint> {
    baseline_vwap_rolling(vwaps, 1)
}

/// Predicts each period's VWAP as the mean of the previous `k` periods'.
/// The first `k` periods have no prediction.
pub fn baseline_vwap_rolling(vwaps: &[f64], k: usize) -> Vec<BaselinePoint> {
    if k == 0 {
        return Vec::new();
    }
    (k..vwaps.len())
        .map(|t| {
            let predicted = vwaps[t - k..t].iter().sum::<f64>() / k as f64;
            let actual = vwaps[t];
            BaselinePoint { period: t, predicted, actual, error: (predicted - actual) / actual }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodError {
    pub label: String,
    pub error: f64,
}

/// VWAP error of predicted volumes per period, over the bars of the period
/// that have a prediction. Periods with fewer than `min_bars` predicted
/// bars are returned separately by label.
pub fn vwap_errors_by_period(
    bars: &BarSeries,
    predicted: &[Option<f64>],
    periods: &[Period],
    min_bars: usize,
) -> Result<(Vec<PeriodError>, Vec<String>)> {
    if predicted.len() != bars.len() {
        return Err(Error::Shape(format!("{} predictions for {} bars", predicted.len(), bars.len())));
    }
    let closes = bars.closes();
    let volumes = bars.volumes();
    let mut errors = Vec::new();
    let mut excluded = Vec::new();
    for p in periods {
        let idx: Vec<usize> = (p.start..p.end).filter(|&i| predicted[i].is_some()).collect();
        if idx.len() < min_bars.max(1) {
            excluded.push(p.label.clone());
            continue;
        }
        let prices: Vec<f64> = idx.iter().map(|&i| closes[i]).collect();
        let pred: Vec<f64> = idx.iter().map(|&i| predicted[i].unwrap_or(0.0)).collect();
        let actual: Vec<f64> = idx.iter().map(|&i| volumes[i]).collect();
        errors.push(PeriodError { label: p.label.clone(), error: vwap_error(&pred, &actual, &prices)? });
    }
    Ok((errors, excluded))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyVwap {
    pub weeks: Vec<PeriodError>,
    /// Weeks with fewer than two forecast trading days.
    pub excluded: Vec<String>,
}

/// Weekly VWAP errors of daily volume forecasts, using daily closes as
/// prices. Days without a forecast are left out of their week.
pub fn weekly_vwap_grouping(daily: &BarSeries, predicted: &[Option<f64>]) -> Result<WeeklyVwap> {
    let periods = group_by_iso_week(daily);
    let (weeks, excluded) = vwap_errors_by_period(daily, predicted, &periods, 2)?;
    Ok(WeeklyVwap { weeks, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Bar, Granularity};
    use approx::assert_abs_diff_eq;
    use chrono::{NaiveDate, TimeZone, Utc};

    fn daily(dates: &[(u32, u32)], closes: &[f64], volumes: &[f64]) -> BarSeries {
        let bars = dates
            .iter()
            .zip(closes.iter().zip(volumes))
            .map(|(&(m, d), (&c, &v))| Bar {
                timestamp: Utc
                    .from_utc_datetime(&NaiveDate::from_ymd_opt(2024, m, d).unwrap().and_hms_opt(0, 0, 0).unwrap()),
                open: c,
                high: c,
                low: c,
                close: c,
                volume: v,
            })
            .collect();
        BarSeries::new(bars, Granularity::Daily).unwrap()
    }

    #[test]
    fn vwap_examples() {
        assert_eq!(vwap(&[10.0, 20.0], &[1.0, 3.0]).unwrap(), 17.5);
        assert_eq!(vwap(&[4.0, 4.0, 4.0], &[1.0, 7.0, 2.0]).unwrap(), 4.0);
        assert!(matches!(vwap(&[1.0], &[0.0]), Err(Error::ZeroVolume)));
        assert!(matches!(vwap(&[1.0], &[1.0, 2.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn vwap_error_hand_computation() {
        let prices = [10.0, 10.5, 11.0, 10.8, 10.2, 9.9, 10.1, 10.4];
        let actual = [5.0, 3.0, 2.0, 2.0, 1.0, 2.0, 3.0, 6.0];
        let pred = [2.0, 2.0, 2.0, 3.0, 3.0, 3.0, 4.0, 5.0];
        let num_p: f64 = 20.0 + 21.0 + 22.0 + 32.4 + 30.6 + 29.7 + 40.4 + 52.0;
        let num_a: f64 = 50.0 + 31.5 + 22.0 + 21.6 + 10.2 + 19.8 + 30.3 + 62.4;
        let expected = (num_p / 24.0 - num_a / 24.0) / (num_a / 24.0);
        assert_abs_diff_eq!(vwap_error(&pred, &actual, &prices).unwrap(), expected, epsilon = 1e-12);
        let scaled: Vec<f64> = actual.iter().map(|v| v * 3.7).collect();
        assert_abs_diff_eq!(vwap_error(&scaled, &actual, &prices).unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(vwap_error(&pred, &actual, &[7.0; 8]).unwrap(), 0.0);
    }

    #[test]
    fn no_change_baseline() {
        let b = baseline_vwap_no_change(&[10.0, 11.0]);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].predicted, 10.0);
        assert_abs_diff_eq!(b[0].error, -1.0 / 11.0, epsilon = 1e-15);
        assert_eq!(baseline_vwap_no_change(&[5.0, 5.0])[0].error, 0.0);
        let five = baseline_vwap_no_change(&[10.0, 12.0, 9.0, 9.0, 15.0]);
        let hand = [2.0 / -12.0, 3.0 / 9.0, 0.0, -6.0 / 15.0];
        for (p, h) in five.iter().zip(hand) {
            assert_abs_diff_eq!(p.error, h, epsilon = 1e-15);
        }
    }

    #[test]
    fn rolling_baseline() {
        let b = baseline_vwap_rolling(&[1.0, 2.0, 3.0, 4.0], 3);
        assert_eq!(b.len(), 1);
        assert_eq!((b[0].period, b[0].predicted), (3, 2.0));
        assert!(baseline_vwap_rolling(&[3.0; 6], 3).iter().all(|p| p.error == 0.0));
        let six = baseline_vwap_rolling(&[10.0, 11.0, 12.0, 14.0, 10.0, 13.0], 3);
        let hand = [(11.0 - 14.0) / 14.0, (37.0 / 3.0 - 10.0) / 10.0, (12.0 - 13.0) / 13.0];
        for (p, h) in six.iter().zip(hand) {
            assert_abs_diff_eq!(p.error, h, epsilon = 1e-15);
        }
    }

    #[test]
    fn iso_weeks_and_exclusion() {
        // Mon 2024-01-08..Fri 01-12, then Mon 01-15 alone.
        let dates = [(1, 8), (1, 9), (1, 10), (1, 11), (1, 12), (1, 15)];
        let closes = [10.0, 11.0, 12.0, 11.0, 10.0, 9.0];
        let volumes = [1.0, 2.0, 3.0, 2.0, 1.0, 5.0];
        let bars = daily(&dates, &closes, &volumes);
        let periods = group_by_iso_week(&bars);
        assert_eq!(periods.len(), 2);
        assert_eq!(periods[0].label, "2024-W02");
        assert_eq!(periods[0].len(), 5);
        let pred: Vec<Option<f64>> = volumes.iter().map(|v| Some(*v)).collect();
        let w = weekly_vwap_grouping(&bars, &pred).unwrap();
        assert_eq!(w.weeks.len(), 1);
        assert_eq!(w.weeks[0].error, 0.0);
        assert_eq!(w.excluded, vec!["2024-W03".to_string()]);
    }

    #[test]
    fn two_week_hand_check() {
        let dates = [(1, 8), (1, 9), (1, 15), (1, 16), (1, 17)];
        let closes = [10.0, 20.0, 5.0, 6.0, 7.0];
        let actual = [1.0, 1.0, 1.0, 1.0, 2.0];
        let bars = daily(&dates, &closes, &actual);
        let pred = [Some(3.0), Some(1.0), Some(1.0), None, Some(1.0)];
        let w = weekly_vwap_grouping(&bars, &pred).unwrap();
        // week 2: (10*3+20)/4 = 12.5 vs 15; week 3 uses days 15 and 17: 6 vs (5+14)/3
        assert_abs_diff_eq!(w.weeks[0].error, (12.5 - 15.0) / 15.0, epsilon = 1e-12);
        let act3 = 19.0 / 3.0;
        assert_abs_diff_eq!(w.weeks[1].error, (6.0 - act3) / act3, epsilon = 1e-12);
    }
}
