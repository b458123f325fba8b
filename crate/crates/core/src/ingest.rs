//! OHLCV bar files and regular-session cleaning.
//!
//! Timestamps are held in UTC. Session membership (weekends, holidays,
//! opening hours) is decided in the exchange's local time so that DST
//! transitions do not shift the retained hours.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Read, Write};

use chrono::{DateTime, Datelike, NaiveDate, NaiveTime, TimeZone, Utc, Weekday};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::VolumeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub timestamp: DateTime<Utc>,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl Bar {
    fn check(&self) -> std::result::Result<(), String> {
        for (name, v) in [("open", self.open), ("high", self.high), ("low", self.low), ("close", self.close)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("{name} price {v} must be positive"));
            }
        }
        if !self.volume.is_finite() || self.volume < 0.0 {
            return Err(format!("volume {} must be >= 0", self.volume));
        }
        let body_lo = self.open.min(self.close);
        let body_hi = self.open.max(self.close);
        if self.low > body_lo || body_hi > self.high {
            return Err(format!(
                "inconsistent range: low {} high {} open {} close {}",
                self.low, self.high, self.open, self.close
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Intraday,
    Daily,
}

/// Bars in strictly increasing timestamp order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarSeries {
    bars: Vec<Bar>,
    granularity: Granularity,
}

impl BarSeries {
    pub fn new(bars: Vec<Bar>, granularity: Granularity) -> Result<Self> {
        if let Some(i) = bars.windows(2).position(|w| w[0].timestamp >= w[1].timestamp) {
            return Err(Error::InvalidValue(format!("bar timestamps not strictly increasing at index {}", i + 1)));
        }
        Ok(Self { bars, granularity })
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn volumes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.volume).collect()
    }

    pub fn closes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }

    pub fn highs(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.high).collect()
    }

    pub fn lows(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.low).collect()
    }

    pub fn volume_series(&self) -> Result<VolumeSeries> {
        VolumeSeries::new(self.bars.iter().map(|b| b.timestamp).collect(), self.volumes())
    }

    /// Sub-series over `range` of bar indices.
    pub fn slice(&self, range: std::ops::Range<usize>) -> BarSeries {
        BarSeries { bars: self.bars[range].to_vec(), granularity: self.granularity }
    }

    fn with_bars(&self, bars: Vec<Bar>) -> BarSeries {
        BarSeries { bars, granularity: self.granularity }
    }
}

/// Header names of the six required columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub timestamp: String,
    pub open: String,
    pub high: String,
    pub low: String,
    pub close: String,
    pub volume: String,
    pub delimiter: u8,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            open: "open".into(),
            high: "high".into(),
            low: "low".into(),
            close: "close".into(),
            volume: "volume".into(),
            delimiter: b',',
        }
    }
}

enum ParsedTime {
    Instant(DateTime<Utc>),
    Date(DateTime<Utc>),
}

fn parse_timestamp(raw: &str) -> std::result::Result<ParsedTime, String> {
    let raw = raw.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Ok(ParsedTime::Instant(t.with_timezone(&Utc)));
    }
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return Ok(ParsedTime::Date(d.and_time(NaiveTime::MIN).and_utc()));
    }
    Err(format!("unrecognised timestamp `{raw}` (expected RFC 3339 or YYYY-MM-DD)"))
}

/// Parses delimited OHLCV text with a header row.
///
/// Line numbers in errors count the header as line 1. A file whose
/// timestamps are all bare dates is tagged [`Granularity::Daily`].
pub fn parse_bars<R: Read>(source: R, schema: &ColumnMapping) -> Result<BarSeries> {
    let mut reader = csv::ReaderBuilder::new().delimiter(schema.delimiter).trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse { line: 1, message: format!("missing column `{name}`") })
    };
    let cols = [
        find(&schema.timestamp)?,
        find(&schema.open)?,
        find(&schema.high)?,
        find(&schema.low)?,
        find(&schema.close)?,
        find(&schema.volume)?,
    ];

    let mut bars = Vec::new();
    let mut all_dates = true;
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let field = |i: usize| -> Result<&str> {
            record
                .get(cols[i])
                .ok_or_else(|| Error::Parse { line, message: format!("data row {} has too few fields", row + 1) })
        };
        let number = |i: usize, name: &str| -> Result<f64> {
            let raw = field(i)?;
            raw.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("data row {}: {name} `{raw}` is not a number", row + 1),
            })
        };
        let timestamp = match parse_timestamp(field(0)?)
            .map_err(|message| Error::Parse { line, message: format!("data row {}: {message}", row + 1) })?
        {
            ParsedTime::Instant(t) => {
                all_dates = false;
                t
            }
            ParsedTime::Date(t) => t,
        };
        let bar = Bar {
            timestamp,
            open: number(1, "open")?,
            high: number(2, "high")?,
            low: number(3, "low")?,
            close: number(4, "close")?,
            volume: number(5, "volume")?,
        };
        bar.check().map_err(|m| Error::Parse { line, message: format!("data row {}: {m}", row + 1) })?;
        if let Some(prev) = bars.last() {
            let prev: &Bar = prev;
            if bar.timestamp <= prev.timestamp {
                return Err(Error::Ordering { line });
            }
        }
        bars.push(bar);
    }
    let granularity = if all_dates && !bars.is_empty() { Granularity::Daily } else { Granularity::Intraday };
    BarSeries::new(bars, granularity)
}

/// Writes bars back out in the normalized layout (RFC 3339 UTC timestamps,
/// or bare dates for daily series).
pub fn write_bars<W: Write>(out: W, series: &BarSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["timestamp", "open", "high", "low", "close", "volume"]).map_err(csv_io)?;
    for b in series.bars() {
        let ts = match series.granularity() {
            Granularity::Daily => b.timestamp.format("%Y-%m-%d").to_string(),
            Granularity::Intraday => b.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        };
        w.write_record([
            ts,
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.volume.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Reads a holiday list: one `YYYY-MM-DD` per line, `#` starts a comment.
pub fn parse_holidays<R: BufRead>(source: R) -> Result<BTreeSet<NaiveDate>> {
    let mut out = BTreeSet::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let date = NaiveDate::parse_from_str(content, "%Y-%m-%d")
            .map_err(|_| Error::Parse { line: i + 1, message: format!("`{content}` is not a YYYY-MM-DD date") })?;
        out.insert(date);
    }
    Ok(out)
}

/// Exchange trading calendar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCalendar {
    pub weekend: Vec<Weekday>,
    pub holidays: BTreeSet<NaiveDate>,
    pub open: NaiveTime,
    pub close: NaiveTime,
    pub timezone: Tz,
    /// Bars expected per intraday session. `None` takes the most common count.
    pub bars_per_session: Option<usize>,
}

impl Default for SessionCalendar {
    fn default() -> Self {
        Self {
            weekend: vec![Weekday::Sat, Weekday::Sun],
            holidays: BTreeSet::new(),
            open: NaiveTime::from_hms_opt(9, 30, 0).unwrap(),
            close: NaiveTime::from_hms_opt(16, 0, 0).unwrap(),
            timezone: chrono_tz::America::New_York,
            bars_per_session: None,
        }
    }
}

impl SessionCalendar {
    pub fn validate(&self) -> Result<()> {
        if self.open >= self.close {
            return Err(Error::InvalidValue(format!("session open {} must precede close {}", self.open, self.close)));
        }
        if self.bars_per_session == Some(0) {
            return Err(Error::InvalidValue("bars_per_session must be >= 1".into()));
        }
        Ok(())
    }

    pub fn is_trading_date(&self, date: NaiveDate) -> bool {
        !self.weekend.contains(&date.weekday()) && !self.holidays.contains(&date)
    }

    /// Exchange-local session date of a bar.
    pub fn session_date(&self, bar: &Bar, granularity: Granularity) -> NaiveDate {
        match granularity {
            Granularity::Daily => bar.timestamp.date_naive(),
            Granularity::Intraday => self.timezone.from_utc_datetime(&bar.timestamp.naive_utc()).date_naive(),
        }
    }

    fn in_hours(&self, bar: &Bar) -> bool {
        let local = self.timezone.from_utc_datetime(&bar.timestamp.naive_utc()).time();
        local >= self.open && local < self.close
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IncompletePolicy {
    #[default]
    Drop,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncompleteSession {
    pub date: NaiveDate,
    pub bars: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub expected_per_session: usize,
    pub retained_sessions: usize,
    pub removed_out_of_session: usize,
    pub incomplete: Vec<IncompleteSession>,
}

#[derive(Debug, Clone)]
pub struct SessionFiltered {
    pub bars: BarSeries,
    pub report: CompletenessReport,
}

/// Keeps bars on trading dates whose local time lies in `[open, close)`.
///
/// Intraday sessions with a bar count other than the expected one are
/// listed in the report and dropped, or turned into an error under
/// [`IncompletePolicy::Fail`]. Daily bars are filtered by date only.
pub fn filter_regular_session(
    series: &BarSeries,
    cal: &SessionCalendar,
    policy: IncompletePolicy,
) -> Result<SessionFiltered> {
    cal.validate()?;
    let granularity = series.granularity();
    let mut by_date: BTreeMap<NaiveDate, Vec<Bar>> = BTreeMap::new();
    let mut removed = 0;
    for bar in series.bars() {
        let date = cal.session_date(bar, granularity);
        let keep = cal.is_trading_date(date) && (granularity == Granularity::Daily || cal.in_hours(bar));
        if keep {
            by_date.entry(date).or_default().push(*bar);
        } else {
            removed += 1;
        }
    }

    let expected = match granularity {
        Granularity::Daily => 1,
        Granularity::Intraday => cal.bars_per_session.unwrap_or_else(|| modal_count(&by_date)),
    };
    let mut incomplete = Vec::new();
    let mut kept = Vec::new();
    let mut retained_sessions = 0;
    for (date, bars) in by_date {
        if bars.len() == expected {
            retained_sessions += 1;
            kept.extend(bars);
        } else {
            incomplete.push(IncompleteSession { date, bars: bars.len() });
        }
    }
    if policy == IncompletePolicy::Fail && !incomplete.is_empty() {
        return Err(Error::IncompleteSessions {
            first: incomplete[0].date.to_string(),
            dates: incomplete.iter().map(|s| s.date.to_string()).collect(),
        });
    }
    Ok(SessionFiltered {
        bars: series.with_bars(kept),
        report: CompletenessReport {
            expected_per_session: expected,
            retained_sessions,
            removed_out_of_session: removed,
            incomplete,
        },
    })
}

fn modal_count(by_date: &BTreeMap<NaiveDate, Vec<Bar>>) -> usize {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for bars in by_date.values() {
        *counts.entry(bars.len()).or_default() += 1;
    }
    // ties go to the larger session size
    counts.into_iter().max_by_key(|&(size, freq)| (freq, size)).map(|(size, _)| size).unwrap_or(0)
}

/// Bars whose UTC calendar date lies in `[start, end]`. An empty result is
/// not an error; callers decide whether to warn.
pub fn restrict_window(series: &BarSeries, start: NaiveDate, end: NaiveDate) -> Result<BarSeries> {
    if start > end {
        return Err(Error::InvalidValue(format!("window start {start} is after end {end}")));
    }
    let bars = series
        .bars()
        .iter()
        .filter(|b| {
            let d = b.timestamp.date_naive();
            d >= start && d <= end
        })
        .copied()
        .collect();
    Ok(series.with_bars(bars))
}
