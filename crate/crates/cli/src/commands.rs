//! One function per subcommand. Each returns the failure manifest entries;
//! an empty list means every fold succeeded.

use serde::Serialize;
use volcast::diagnostics::{acf, decompose_moving_average, pacf};
use volcast::evaluation::{
    baseline_vwap_no_change, baseline_vwap_rolling, forward_stepwise, group_by_iso_week, group_by_session,
    period_vwaps, rolling_origin_cv, vwap_errors_by_period, CvReport, Forecaster, OracleForecaster, Period,
    PeriodError, StepwiseResult,
};
use volcast::indicators::IndicatorSpec;
use volcast::ingest::{write_bars, Granularity, IncompletePolicy};
use volcast::spectral::{periodogram, select_m, FdprForecaster, MSelection};

use crate::args::{BacktestArgs, DiagnoseArgs, IngestArgs, ReplicateArgs, SelectArgs, SpectralArgs, VwapArgs};
use crate::error::CliResult;
use crate::output::{fmt_mape, fmt_mse, line_chart, text_table, write_file};
use crate::run::{align, build_forecaster, cv_config, load, parse_specs, write_report, Failure};

fn fold_failures(stage: &str, report: &CvReport) -> Vec<Failure> {
    report
        .failed
        .iter()
        .map(|f| Failure { stage: stage.into(), origin: Some(f.origin), error: f.error.clone() })
        .collect()
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> volcast::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

pub fn ingest(a: &IngestArgs) -> CliResult<Vec<Failure>> {
    let policy = if a.strict { IncompletePolicy::Fail } else { IncompletePolicy::Drop };
    let ds = load(&a.data, policy)?;
    if ds.bars.is_empty() {
        eprintln!("warning: no bars left after windowing and session filtering");
    }
    let config = ds.run_config("ingest", &a.data);
    write_file(&a.data.out, "bars.csv", &csv_bytes(|b| write_bars(b, &ds.bars))?)?;
    write_report(&a.data, &config, "completeness.json", &ds.completeness)?;
    println!(
        "{} bars in {} sessions kept; {} bars outside sessions; {} incomplete sessions dropped",
        ds.bars.len(),
        ds.completeness.retained_sessions,
        ds.completeness.removed_out_of_session,
        ds.completeness.incomplete.len()
    );
    Ok(Vec::new())
}

#[derive(Serialize)]
struct BacktestResult<'a> {
    aligned_from: usize,
    report: &'a CvReport,
}

pub fn backtest(a: &BacktestArgs) -> CliResult<Vec<Failure>> {
    let ds = load(&a.data, IncompletePolicy::Drop)?;
    let specs = parse_specs(a.indicators.as_deref())?;
    let al = align(&ds.bars, &specs)?;
    let cfg = cv_config(&a.cv, al.y.len(), &ds)?;
    let mut config = ds.run_config("backtest", &a.data);
    config.indicators = specs.iter().map(ToString::to_string).collect();
    config.cv = Some(cfg);
    let forecaster: Box<dyn Forecaster> = if a.oracle {
        Box::new(OracleForecaster::new(al.y.clone()))
    } else {
        let (f, model) = build_forecaster(&a.model, &ds, &al.y, &cfg, a.data.seed)?;
        config.model = Some(model);
        f
    };
    let report = rolling_origin_cv(forecaster.as_ref(), &al.y, al.x.as_ref(), &cfg)?;

    let label = if specs.is_empty() {
        report.forecaster.clone()
    } else {
        format!("{} + {}", report.forecaster, config.indicators.join(", "))
    };
    let table = text_table(
        &["Model", "Average MSE", "Average MAPE", "Folds", "Failed"],
        &[vec![
            label,
            fmt_mse(report.avg_mse),
            fmt_mape(report.avg_mape),
            report.folds.len().to_string(),
            report.failed.len().to_string(),
        ]],
    );
    write_report(&a.data, &config, "backtest.json", BacktestResult { aligned_from: al.from, report: &report })?;
    write_file(&a.data.out, "folds.csv", &csv_bytes(|b| report.write_fold_csv(b))?)?;
    write_file(&a.data.out, "backtest.txt", table.as_bytes())?;
    print!("{table}");
    Ok(fold_failures("backtest", &report))
}

fn trail_label(covariates: &[String]) -> String {
    if covariates.is_empty() {
        "none".into()
    } else {
        covariates.join(", ")
    }
}

fn run_select(a: &SelectArgs) -> CliResult<(Vec<Failure>, StepwiseResult, Vec<IndicatorSpec>)> {
    let ds = load(&a.data, IncompletePolicy::Drop)?;
    let mut specs = parse_specs(a.indicators.as_deref())?;
    if specs.is_empty() {
        specs = IndicatorSpec::defaults();
    }
    let al = align(&ds.bars, &specs)?;
    let cfg = cv_config(&a.cv, al.y.len(), &ds)?;
    let (forecaster, model) = build_forecaster(&a.model, &ds, &al.y, &cfg, a.data.seed)?;
    let mut config = ds.run_config("select", &a.data);
    config.indicators = specs.iter().map(ToString::to_string).collect();
    config.cv = Some(cfg);
    config.model = Some(model);

    let result = forward_stepwise(&specs, forecaster.as_ref(), &ds.bars.volumes(), &ds.bars, &cfg)?;
    let rows: Vec<Vec<String>> = result
        .trail
        .iter()
        .map(|e| vec![trail_label(&e.covariates), fmt_mse(e.avg_mse), fmt_mape(e.avg_mape)])
        .collect();
    let mut table = text_table(&["Covariates", "Average MSE", "Average MAPE"], &rows);
    table.push_str(&format!("selected: {}\n", trail_label(&result.selected)));
    let all_rows: Vec<Vec<String>> = result
        .evaluated
        .iter()
        .map(|e| vec![trail_label(&e.covariates), fmt_mse(e.avg_mse), fmt_mape(e.avg_mape), e.failed_folds.to_string()])
        .collect();
    let all = text_table(&["Covariates", "Average MSE", "Average MAPE", "Failed folds"], &all_rows);

    write_report(&a.data, &config, "select.json", &result)?;
    write_file(&a.data.out, "select.txt", table.as_bytes())?;
    write_file(&a.data.out, "select_all.txt", all.as_bytes())?;
    print!("{table}");

    let failures = result
        .evaluated
        .iter()
        .filter(|e| e.failed_folds > 0)
        .map(|e| Failure {
            stage: format!("select [{}]", trail_label(&e.covariates)),
            origin: None,
            error: format!("{} folds failed", e.failed_folds),
        })
        .collect();
    let chosen =
        result.selected.iter().filter_map(|name| specs.iter().find(|s| &s.to_string() == name).copied()).collect();
    Ok((failures, result, chosen))
}

pub fn select(a: &SelectArgs) -> CliResult<Vec<Failure>> {
    run_select(a).map(|(f, _, _)| f)
}

fn default_m_grid(granularity: Granularity) -> Vec<usize> {
    match granularity {
        Granularity::Intraday => vec![2, 3, 5, 10, 25, 100],
        Granularity::Daily => vec![2, 3, 5, 10, 25, 40, 50, 100],
    }
}

fn run_spectral(a: &SpectralArgs) -> CliResult<(Vec<Failure>, MSelection)> {
    let ds = load(&a.data, IncompletePolicy::Drop)?;
    let y = ds.bars.volumes();
    let cfg = cv_config(&a.cv, y.len(), &ds)?;
    let grid = a.m_grid.clone().unwrap_or_else(|| default_m_grid(ds.granularity));
    let mut config = ds.run_config("spectral", &a.data);
    config.cv = Some(cfg);
    config.m_grid = Some(grid.clone());

    let selection = select_m(&y, &grid, &cfg)?;
    let rows: Vec<Vec<String>> =
        selection.table.iter().map(|r| vec![r.m.to_string(), fmt_mse(r.avg_mse), fmt_mape(r.avg_mape)]).collect();
    let mut table = text_table(&["m", "Average MSE", "Average MAPE"], &rows);
    table.push_str(&format!("selected m: {}\n", selection.best_m));

    let pg = periodogram(&y)?;
    let mut csv = String::from("frequency,power\n");
    for (f, p) in pg.frequencies.iter().zip(&pg.power) {
        csv.push_str(&format!("{f},{p}\n"));
    }
    write_report(&a.data, &config, "spectral.json", &selection)?;
    write_file(&a.data.out, "spectral.txt", table.as_bytes())?;
    write_file(&a.data.out, "periodogram.csv", csv.as_bytes())?;
    print!("{table}");

    let failures = selection
        .table
        .iter()
        .filter(|r| r.failed_folds > 0)
        .map(|r| Failure {
            stage: format!("spectral [m={}]", r.m),
            origin: None,
            error: format!("{} folds failed", r.failed_folds),
        })
        .collect();
    Ok((failures, selection))
}

pub fn spectral(a: &SpectralArgs) -> CliResult<Vec<Failure>> {
    run_spectral(a).map(|(f, _)| f)
}

#[derive(Serialize)]
struct VwapSeries {
    name: String,
    errors: Vec<PeriodError>,
    max_abs_error: f64,
    mean_abs_error: f64,
}

#[derive(Serialize)]
struct VwapResult {
    grouping: &'static str,
    excluded_periods: Vec<String>,
    series: Vec<VwapSeries>,
}

fn summarize(name: String, errors: Vec<PeriodError>) -> VwapSeries {
    let abs: Vec<f64> = errors.iter().map(|e| e.error.abs()).collect();
    let max_abs_error = abs.iter().copied().fold(0.0, f64::max);
    let mean_abs_error = if abs.is_empty() { 0.0 } else { abs.iter().sum::<f64>() / abs.len() as f64 };
    VwapSeries { name, errors, max_abs_error, mean_abs_error }
}

fn vwap_with(a: &VwapArgs, specs: Vec<IndicatorSpec>) -> CliResult<Vec<Failure>> {
    let ds = load(&a.data, IncompletePolicy::Drop)?;
    let al = align(&ds.bars, &specs)?;
    let cfg = cv_config(&a.cv, al.y.len(), &ds)?;
    let mut config = ds.run_config("vwap-report", &a.data);
    config.indicators = specs.iter().map(ToString::to_string).collect();
    config.cv = Some(cfg);

    let (periods, min_bars, grouping): (Vec<Period>, usize, &'static str) = match ds.granularity {
        Granularity::Intraday => {
            (group_by_session(&ds.bars, &ds.calendar), ds.completeness.expected_per_session, "session")
        }
        Granularity::Daily => (group_by_iso_week(&ds.bars), 2, "iso-week"),
    };

    let mut forecasters: Vec<Box<dyn Forecaster>> = Vec::new();
    if a.oracle {
        forecasters.push(Box::new(OracleForecaster::new(al.y.clone())));
    } else {
        let (f, model) = build_forecaster(&a.model, &ds, &al.y, &cfg, a.data.seed)?;
        config.model = Some(model);
        forecasters.push(f);
    }
    if let Some(m) = a.m {
        forecasters.push(Box::new(FdprForecaster { m }));
    }

    let mut failures = Vec::new();
    let mut series = Vec::new();
    let mut excluded = Vec::new();
    for (k, f) in forecasters.iter().enumerate() {
        // covariates only feed the first (SARIMAX) model
        let x = if k == 0 { al.x.as_ref() } else { None };
        let report = rolling_origin_cv(f.as_ref(), &al.y, x, &cfg)?;
        failures.extend(fold_failures(&format!("vwap-report [{}]", report.forecaster), &report));
        let mut predicted = vec![None; ds.bars.len()];
        for fold in &report.folds {
            for (j, v) in fold.forecasts.iter().enumerate() {
                predicted[al.from + fold.origin + j] = Some(*v);
            }
        }
        let (errors, skipped) = vwap_errors_by_period(&ds.bars, &predicted, &periods, min_bars)?;
        if k == 0 {
            excluded = skipped;
        }
        let name = if k == 0 && !specs.is_empty() {
            format!("{} + {}", report.forecaster, config.indicators.join(", "))
        } else {
            report.forecaster.clone()
        };
        series.push(summarize(name, errors));
    }

    let labels: Vec<String> = series[0].errors.iter().map(|e| e.label.clone()).collect();
    let vwaps = period_vwaps(&ds.bars, &periods)?;
    let baseline_errors = |points: Vec<volcast::evaluation::BaselinePoint>| -> Vec<PeriodError> {
        points
            .into_iter()
            .filter(|p| labels.contains(&periods[p.period].label))
            .map(|p| PeriodError { label: periods[p.period].label.clone(), error: p.error })
            .collect()
    };
    series.push(summarize("no change".into(), baseline_errors(baseline_vwap_no_change(&vwaps))));
    series.push(summarize(
        format!("rolling mean of {}", a.rolling),
        baseline_errors(baseline_vwap_rolling(&vwaps, a.rolling)),
    ));

    let mut csv = String::from("period,series,error\n");
    for s in &series {
        for e in &s.errors {
            csv.push_str(&format!("{},{},{}\n", e.label, s.name, e.error));
        }
    }
    let chart_series: Vec<(String, Vec<Option<f64>>)> = series
        .iter()
        .map(|s| {
            let values = labels.iter().map(|l| s.errors.iter().find(|e| &e.label == l).map(|e| e.error)).collect();
            (s.name.clone(), values)
        })
        .collect();
    let svg = line_chart(&format!("VWAP error per {grouping}"), &labels, &chart_series);
    let rows: Vec<Vec<String>> = series
        .iter()
        .map(|s| {
            vec![
                s.name.clone(),
                s.errors.len().to_string(),
                format!("{:.5}", s.max_abs_error),
                format!("{:.5}", s.mean_abs_error),
            ]
        })
        .collect();
    let table = text_table(&["Series", "Periods", "Max |error|", "Mean |error|"], &rows);

    write_report(&a.data, &config, "vwap.json", VwapResult { grouping, excluded_periods: excluded, series })?;
    write_file(&a.data.out, "vwap_errors.csv", csv.as_bytes())?;
    write_file(&a.data.out, "vwap_errors.svg", svg.as_bytes())?;
    write_file(&a.data.out, "vwap.txt", table.as_bytes())?;
    print!("{table}");
    Ok(failures)
}

pub fn vwap_report(a: &VwapArgs) -> CliResult<Vec<Failure>> {
    vwap_with(a, parse_specs(a.indicators.as_deref())?)
}

#[derive(Serialize)]
struct DiagnoseResult {
    n: usize,
    acf: volcast::diagnostics::CorrelogramResult,
    pacf: volcast::diagnostics::CorrelogramResult,
    decomposition_period: Option<usize>,
}

pub fn diagnose(a: &DiagnoseArgs) -> CliResult<Vec<Failure>> {
    let ds = load(&a.data, IncompletePolicy::Drop)?;
    let y = ds.bars.volumes();
    if y.len() < 2 {
        return Err(volcast::Error::TooShort { needed: 2, got: y.len() }.into());
    }
    let max_lag = a.max_lag.unwrap_or(40).min(y.len() - 1);
    let r_acf = acf(&y, max_lag)?;
    let r_pacf = pacf(&y, max_lag)?;
    write_file(&a.data.out, "acf.csv", &csv_bytes(|b| r_acf.write_csv(b))?)?;
    write_file(&a.data.out, "pacf.csv", &csv_bytes(|b| r_pacf.write_csv(b))?)?;
    let lags: Vec<String> = r_acf.lags.iter().map(ToString::to_string).collect();
    let band = vec![Some(r_acf.band); lags.len()];
    let svg = line_chart(
        "Correlogram",
        &lags,
        &[
            ("ACF".into(), r_acf.values.iter().map(|v| Some(*v)).collect()),
            ("PACF".into(), r_pacf.values.iter().map(|v| Some(*v)).collect()),
            ("95% band".into(), band.clone()),
            ("".into(), band.iter().map(|b| b.map(|v| -v)).collect()),
        ],
    );
    write_file(&a.data.out, "correlogram.svg", svg.as_bytes())?;

    let decomposition_period = if ds.period >= 2 && y.len() >= 2 * ds.period {
        let d = decompose_moving_average(&y, ds.period)?;
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        let mut csv = String::from("index,volume,trend,seasonal,irregular\n");
        for t in 0..y.len() {
            csv.push_str(&format!("{t},{},{},{},{}\n", y[t], opt(d.trend[t]), d.seasonal[t], opt(d.irregular[t])));
        }
        write_file(&a.data.out, "decomposition.csv", csv.as_bytes())?;
        Some(ds.period)
    } else {
        eprintln!("note: decomposition skipped (needs a period >= 2 and two full periods of data)");
        None
    };
    let config = ds.run_config("diagnose", &a.data);
    println!("{} observations; ACF/PACF to lag {max_lag}; white-noise band +/-{:.4}", y.len(), r_acf.band);
    write_report(
        &a.data,
        &config,
        "diagnose.json",
        DiagnoseResult { n: y.len(), acf: r_acf, pacf: r_pacf, decomposition_period },
    )?;
    Ok(Vec::new())
}

/// Backtest, covariate selection, harmonic selection, then a VWAP report
/// using the selected covariates and number of harmonics.
pub fn replicate(a: &ReplicateArgs) -> CliResult<Vec<Failure>> {
    let sub = |name: &str| {
        let mut d = a.data.clone();
        d.out = a.data.out.join(name);
        d
    };
    let mut failures = Vec::new();

    println!("== backtest");
    failures.extend(backtest(&BacktestArgs {
        data: sub("backtest"),
        cv: a.cv.clone(),
        model: a.model.clone(),
        indicators: None,
        oracle: false,
    })?);

    println!("== covariate selection");
    let (f, _, chosen) = run_select(&SelectArgs {
        data: sub("select"),
        cv: a.cv.clone(),
        model: a.model.clone(),
        indicators: a.indicators.clone(),
    })?;
    failures.extend(f);

    println!("== harmonic selection");
    let (f, selection) =
        run_spectral(&SpectralArgs { data: sub("spectral"), cv: a.cv.clone(), m_grid: a.m_grid.clone() })?;
    failures.extend(f);

    println!("== VWAP report");
    let vwap_args = VwapArgs {
        data: sub("vwap"),
        cv: a.cv.clone(),
        model: a.model.clone(),
        indicators: None,
        m: Some(selection.best_m),
        rolling: 3,
        oracle: false,
    };
    failures.extend(vwap_with(&vwap_args, chosen)?);
    Ok(failures)
}

/// Writes the failure manifest for a run that did not complete cleanly.
pub fn write_failures(out: &std::path::Path, command: &str, failures: &[Failure]) -> CliResult<()> {
    #[derive(Serialize)]
    struct Manifest<'a> {
        command: &'a str,
        failures: &'a [Failure],
    }
    crate::output::write_json(out, "failures.json", &Manifest { command, failures }).map(|_| ())
}
