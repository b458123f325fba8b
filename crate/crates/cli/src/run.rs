//! Resolved run configuration, data loading and the pieces shared by the
//! commands.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;
use volcast::evaluation::{AutoSarimaxForecaster, CvConfig, Forecaster, FutureExogPolicy, SarimaxForecaster};
use volcast::indicators::{build_exog, parse_indicator_list, ExogMatrix, IndicatorSpec};
use volcast::ingest::{
    filter_regular_session, parse_bars, parse_holidays, restrict_window, BarSeries, ColumnMapping, CompletenessReport,
    Granularity, IncompletePolicy, SessionCalendar,
};
use volcast::sarimax::{auto_order_search, Criterion, FitOptions, ModelOrder, SearchBounds};

use crate::args::{CvArgs, DataArgs, ModelArgs};
use crate::error::{CliError, CliResult};
use crate::output::write_json;

/// Everything a report needs to be tied back to the run that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub data: String,
    pub calendar: Option<String>,
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
    pub granularity: Granularity,
    pub period: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    pub indicators: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cv: Option<CvConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_grid: Option<Vec<usize>>,
    pub out: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelConfig {
    pub spec: String,
    pub drift: bool,
    pub per_fold: bool,
    pub exog_policy: FutureExogPolicy,
    /// Order used for every fold when `spec` is `auto` without `per_fold`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolved: Option<String>,
}

#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub config: &'a RunConfig,
    pub result: T,
}

pub fn write_report<T: Serialize>(data: &DataArgs, config: &RunConfig, name: &str, result: T) -> CliResult<()> {
    let generated_at = (!data.no_timestamp).then(|| chrono::Utc::now().to_rfc3339());
    write_json(&data.out, name, &Report { generated_at, config, result })?;
    Ok(())
}

/// One entry of the failure manifest.
#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub stage: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<usize>,
    pub error: String,
}

pub struct Dataset {
    pub bars: BarSeries,
    pub calendar: SessionCalendar,
    pub completeness: CompletenessReport,
    pub granularity: Granularity,
    pub period: usize,
}

impl Dataset {
    pub fn run_config(&self, command: &str, data: &DataArgs) -> RunConfig {
        RunConfig {
            command: command.into(),
            data: data.data.display().to_string(),
            calendar: data.calendar.as_ref().map(|p| p.display().to_string()),
            from: data.from,
            to: data.to,
            granularity: self.granularity,
            period: self.period,
            model: None,
            indicators: Vec::new(),
            cv: None,
            m_grid: None,
            out: data.out.display().to_string(),
            seed: data.seed,
        }
    }
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Parses the bar file, restricts it to the date window and keeps regular
/// sessions of trading days.
pub fn load(args: &DataArgs, policy: IncompletePolicy) -> CliResult<Dataset> {
    let input = |source| CliError::Input { path: args.data.display().to_string(), source };
    let mut bars = parse_bars(open(&args.data)?, &ColumnMapping::default()).map_err(input)?;
    if let Some(g) = args.granularity {
        bars = BarSeries::new(bars.bars().to_vec(), g.into()).map_err(input)?;
    }
    let granularity = bars.granularity();

    let mut calendar = SessionCalendar::default();
    if let Some(path) = &args.calendar {
        calendar.holidays = parse_holidays(BufReader::new(open(path)?))
            .map_err(|source| CliError::Input { path: path.display().to_string(), source })?;
    }

    if args.from.is_some() || args.to.is_some() {
        let from = args.from.unwrap_or(NaiveDate::MIN);
        let to = args.to.unwrap_or(NaiveDate::MAX);
        bars = restrict_window(&bars, from, to).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let filtered = filter_regular_session(&bars, &calendar, policy).map_err(input)?;

    let period = match (args.period, granularity) {
        (Some(p), Granularity::Intraday) if p < 2 => {
            return Err(CliError::Usage(format!("intraday data needs a seasonal period >= 2, got {p}")))
        }
        (Some(0), _) => return Err(CliError::Usage("seasonal period must be >= 1".into())),
        (Some(p), _) => p,
        (None, Granularity::Intraday) => 8,
        (None, Granularity::Daily) => 1,
    };
    Ok(Dataset { bars: filtered.bars, calendar, completeness: filtered.report, granularity, period })
}

pub fn parse_specs(list: Option<&str>) -> CliResult<Vec<IndicatorSpec>> {
    match list {
        None => Ok(Vec::new()),
        Some(s) => parse_indicator_list(s).map_err(|e| CliError::Usage(e.to_string())),
    }
}

/// Volumes and covariates from the first row where every indicator is
/// defined.
pub struct Aligned {
    pub from: usize,
    pub y: Vec<f64>,
    pub x: Option<ExogMatrix>,
}

pub fn align(bars: &BarSeries, specs: &[IndicatorSpec]) -> CliResult<Aligned> {
    let volumes = bars.volumes();
    if specs.is_empty() {
        return Ok(Aligned { from: 0, y: volumes, x: None });
    }
    let x = build_exog(bars, specs)?;
    let from = x.valid_from();
    if from >= volumes.len() {
        return Err(volcast::Error::TooShort { needed: from + 1, got: volumes.len() }.into());
    }
    let y = volumes[from..].to_vec();
    let x = x.slice_rows(from..volumes.len());
    Ok(Aligned { from, y, x: Some(x) })
}

/// Cross-validation settings for a series of length `n`. Intraday defaults
/// keep origins on session boundaries.
pub fn cv_config(cv: &CvArgs, n: usize, ds: &Dataset) -> CliResult<CvConfig> {
    let intraday = ds.granularity == Granularity::Intraday;
    let horizon = cv.horizon.unwrap_or(if intraday { ds.period } else { 1 });
    let initial_window = cv.initial_window.unwrap_or_else(|| {
        let half = n.div_ceil(2);
        if intraday {
            half.div_ceil(ds.period) * ds.period
        } else {
            half
        }
    });
    let cfg =
        CvConfig { horizon, initial_window, window_policy: cv.window_policy.into(), step: cv.step.unwrap_or(horizon) };
    cfg.validate(n)?;
    Ok(cfg)
}

pub fn fit_options(seed: u64) -> FitOptions {
    FitOptions { seed, ..FitOptions::default() }
}

pub fn search_bounds(period: usize) -> SearchBounds {
    if period > 1 {
        SearchBounds::seasonal(period)
    } else {
        SearchBounds::default()
    }
}

/// The SARIMA(X) forecaster described by `--model`. With `auto` and no
/// `--per-fold`, orders are searched once on the first training window
/// without covariates.
pub fn build_forecaster(
    m: &ModelArgs,
    ds: &Dataset,
    y: &[f64],
    cfg: &CvConfig,
    seed: u64,
) -> CliResult<(Box<dyn Forecaster>, ModelConfig)> {
    let options = fit_options(seed);
    let exog_policy: FutureExogPolicy = m.exog_policy.into();
    let mut config =
        ModelConfig { spec: m.model.clone(), drift: m.drift, per_fold: m.per_fold, exog_policy, resolved: None };
    if m.model.trim().eq_ignore_ascii_case("auto") {
        if m.per_fold {
            let f = AutoSarimaxForecaster {
                bounds: search_bounds(ds.period),
                criterion: Criterion::Aic,
                options,
                exog_policy,
            };
            return Ok((Box::new(f), config));
        }
        let (model, _) =
            auto_order_search(&y[..cfg.initial_window], None, &search_bounds(ds.period), Criterion::Aic, &options)?;
        config.resolved = Some(format!("{} {}", model.order, model.order.label()));
        let f = SarimaxForecaster { order: model.order, options, exog_policy };
        return Ok((Box::new(f), config));
    }
    if m.per_fold {
        return Err(CliError::Usage("--per-fold needs --model auto".into()));
    }
    let order: ModelOrder = m.model.parse().map_err(|e: volcast::Error| CliError::Usage(e.to_string()))?;
    let f = SarimaxForecaster { order: order.drift(m.drift), options, exog_policy };
    Ok((Box::new(f), config))
}
