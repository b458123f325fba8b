//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any hard criterion fails.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use volcast::diagnostics::{acf, decompose_moving_average, pacf};
use volcast::evaluation::{
    baseline_vwap_no_change, baseline_vwap_rolling, forward_stepwise, group_by_iso_week, period_vwaps,
    rolling_origin_cv, vwap_error, vwap_errors_by_period, CvConfig, SarimaxForecaster,
};
use volcast::indicators::{build_exog, IndicatorKind, IndicatorSpec};
use volcast::ingest::{Bar, BarSeries};
use volcast::sarimax::{
    auto_order_search, fit, log_likelihood, Criterion, FitOptions, ModelOrder, SarimaxParams, SearchBounds,
};
use volcast::series::{difference, integrate, DifferenceSpec};
use volcast::spectral::{fit_harmonics, forecast_harmonics, periodogram, select_m};
use volcast::Error;

use common::*;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn within_budget(ok: bool, detail: String, started: Instant, budget: Duration) -> Verdict {
    let elapsed = started.elapsed();
    let detail = format!("{detail}; {:.1}s of {}s budget", elapsed.as_secs_f64(), budget.as_secs());
    verdict(ok && elapsed <= budget, detail)
}

fn fit_or_best(order: &ModelOrder, y: &[f64]) -> Option<volcast::sarimax::FittedModel> {
    match fit(order, y, None, &FitOptions::default()) {
        Ok(m) => Some(m),
        Err(Error::Convergence { best, .. }) => Some(*best),
        Err(_) => None,
    }
}

fn likelihood_oracle() -> Verdict {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let p = rng.random_range(0..=3usize);
        let q = rng.random_range(0..=3usize);
        let ar = ar_from_roots(&random_roots(p, 0.9, &mut rng));
        let ma = ma_from_roots(&random_roots(q, 0.9, &mut rng));
        let sigma2: f64 = rng.random_range(0.2..3.0);
        let n = rng.random_range(10..=50usize);
        let y = simulate_arma(&ar, &ma, sigma2.sqrt(), n, &mut rng);
        let order = ModelOrder::new(p, 0, q);
        let params = SarimaxParams { phi: ar.clone(), theta: ma.clone(), sigma2, ..SarimaxParams::zeros(&order, 0) };
        let ll = log_likelihood(&order, &params, &y, None).expect("admissible draw");
        let gamma: Vec<f64> = arma_autocovariance(&ar, &ma, n).iter().map(|g| sigma2 * g).collect();
        worst = worst.max((ll - dense_gaussian_loglik(&y, &gamma)).abs());
    }
    within_budget(
        worst < 1e-6,
        format!("max |diff| = {worst:.2e} over 50 draws (tol 1e-6)"),
        started,
        Duration::from_secs(10),
    )
}

fn parameter_recovery() -> Verdict {
    let started = Instant::now();
    let opts = FitOptions::default();

    let mut rng = StdRng::seed_from_u64(201);
    let y = simulate_arma(&[0.6], &[], 1.0, 1000, &mut rng);
    let phi = fit(&ModelOrder::new(1, 0, 0), &y, None, &opts).map(|m| m.params.phi[0]).unwrap_or(f64::NAN);

    let mut rng = StdRng::seed_from_u64(202);
    let mut sar = vec![0.0; 8];
    sar[7] = 0.5;
    let y = simulate_arma(&sar, &[], 1.0, 800, &mut rng);
    let order = ModelOrder::new(0, 0, 0).seasonal(1, 0, 0, 8);
    let big_phi = fit(&order, &y, None, &opts).map(|m| m.params.seasonal_phi[0]).unwrap_or(f64::NAN);

    let mut rng = StdRng::seed_from_u64(203);
    let n = 500;
    let x1 = white_noise(n, 1.0, &mut rng);
    let x2 = white_noise(n, 1.0, &mut rng);
    let u = simulate_arma(&[0.5], &[], 1.0, n, &mut rng);
    let y: Vec<f64> = (0..n).map(|t| 2.0 * x1[t] - 3.0 * x2[t] + u[t]).collect();
    let xm =
        volcast::indicators::ExogMatrix::from_columns(vec!["x1".into(), "x2".into()], vec![x1.clone(), x2.clone()])
            .unwrap();
    let beta = fit(&ModelOrder::new(1, 0, 0), &y, Some(&xm), &opts).map(|m| m.params.beta).unwrap_or_default();
    // GLS standard errors under the true AR(1) errors
    let white = |x: &[f64]| -> Vec<f64> {
        let mut w = vec![x[0] * 0.75f64.sqrt()];
        w.extend((1..x.len()).map(|t| x[t] - 0.5 * x[t - 1]));
        w
    };
    let (w1, w2) = (white(&x1), white(&x2));
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let cov = nalgebra::Matrix2::new(dot(&w1, &w1), dot(&w1, &w2), dot(&w2, &w1), dot(&w2, &w2)).try_inverse().unwrap();
    let z = if beta.len() == 2 {
        [(beta[0] - 2.0).abs() / cov[(0, 0)].sqrt(), (beta[1] + 3.0).abs() / cov[(1, 1)].sqrt()]
    } else {
        [f64::INFINITY; 2]
    };

    let ok = (phi - 0.6).abs() < 0.08 && (big_phi - 0.5).abs() < 0.10 && z[0] < 3.0 && z[1] < 3.0;
    within_budget(
        ok,
        format!(
            "phi = {phi:.4}, seasonal phi = {big_phi:.4}, beta = {beta:.4?} ({:.2}, {:.2} s.e. from truth)",
            z[0], z[1]
        ),
        started,
        Duration::from_secs(60),
    )
}

fn auto_vs_brute_force() -> Verdict {
    let started = Instant::now();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut lines = Vec::new();
    for seed in 0..10u64 {
        let mut rng = StdRng::seed_from_u64(300 + seed);
        let p = rng.random_range(0..=2usize);
        let q = rng.random_range(0..=2usize);
        let d = rng.random_range(0..=1usize);
        let ar = ar_from_roots(&random_roots(p, 0.8, &mut rng));
        let ma = ma_from_roots(&random_roots(q, 0.8, &mut rng));
        let u = simulate_arma(&ar, &ma, 1.0, 400, &mut rng);
        let y: Vec<f64> = if d == 1 {
            u.iter()
                .scan(50.0, |s, v| {
                    *s += v;
                    Some(*s)
                })
                .collect()
        } else {
            u.iter().map(|v| v + 50.0).collect()
        };
        let bounds = SearchBounds { max_p: 2, max_q: 2, ..SearchBounds::default() };
        let Ok((chosen, log)) = auto_order_search(&y, None, &bounds, Criterion::Aic, &FitOptions::default()) else {
            return Verdict::Fail(format!("search failed on dataset {seed}"));
        };
        let mut grid_best = f64::INFINITY;
        for gp in 0..=2 {
            for gq in 0..=2 {
                for drift in [false, true] {
                    if drift && log.d > 1 {
                        continue;
                    }
                    if let Some(m) = fit_or_best(&ModelOrder::new(gp, log.d, gq).drift(drift), &y) {
                        grid_best = grid_best.min(m.aic);
                    }
                }
            }
        }
        let gap = chosen.aic - grid_best;
        worst_gap = worst_gap.max(gap);
        lines.push(format!("({p},{d},{q})->{} gap {gap:.2}", chosen.order.label()));
    }
    println!("    criterion 3 detail: {}", lines.join(", "));
    within_budget(
        worst_gap <= 2.0,
        format!("worst AIC gap to the exhaustive grid = {worst_gap:.3} (limit 2.0)"),
        started,
        Duration::from_secs(300),
    )
}

fn spectral_exactness() -> Verdict {
    let n = 128;
    let f = 9.0 / 128.0;
    let y: Vec<f64> = (0..n).map(|t| (2.0 * PI * f * t as f64).cos()).collect();
    let pg = periodogram(&y).unwrap();
    let total: f64 = pg.power.iter().sum();
    let share = pg.power[8] / total;

    let level: Vec<f64> = y.iter().map(|v| 3.0 + 2.0 * v).collect();
    let model = fit_harmonics(&level, &[f], 0).unwrap();
    let coef_err = (model.intercept - 3.0).abs().max((model.cos_coef[0] - 2.0).abs()).max(model.sin_coef[0].abs());

    let f2 = 4.0 / 64.0;
    let train: Vec<f64> = (0..64).map(|t| 1.5 * (2.0 * PI * f2 * t as f64 + 0.9).sin() + 10.0).collect();
    let m2 = fit_harmonics(&train, &[f2], 0).unwrap();
    let periods = 3 * 16;
    let ahead = forecast_harmonics(&m2, 64, periods).unwrap();
    let extrap_err = ahead
        .iter()
        .enumerate()
        .map(|(j, v)| (v - 1.5 * (2.0 * PI * f2 * (64 + j) as f64 + 0.9).sin() - 10.0).abs())
        .fold(0.0, f64::max);

    verdict(
        share > 1.0 - 1e-9 && coef_err < 1e-8 && extrap_err < 1e-6,
        format!("power share {share:.12}, coefficient error {coef_err:.1e}, extrapolation error {extrap_err:.1e}"),
    )
}

fn m_selection() -> Verdict {
    let mut hits = 0;
    let mut picks = Vec::new();
    for seed in 0..10u64 {
        let mut rng = StdRng::seed_from_u64(500 + seed);
        let n = 512;
        let signal: Vec<f64> = (0..n)
            .map(|t| {
                let t = t as f64;
                3.0 * (2.0 * PI * t / 8.0).cos()
                    + 2.0 * (2.0 * PI * t / 16.0 + 1.0).sin()
                    + 2.5 * (2.0 * PI * t / 32.0 + 0.3).cos()
            })
            .collect();
        let mean = signal.iter().sum::<f64>() / n as f64;
        let var = signal.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let noise = white_noise(n, (var / 5.0).sqrt(), &mut rng);
        let y: Vec<f64> = signal.iter().zip(&noise).map(|(s, e)| 50.0 + s + e).collect();
        let cfg = CvConfig { step: 32, ..CvConfig::new(32, 256) };
        let best = select_m(&y, &[2, 3, 5, 10, 25], &cfg).map(|s| s.best_m).unwrap_or(0);
        picks.push(best);
        hits += usize::from(best == 3);
    }
    verdict(hits >= 8, format!("m = 3 chosen in {hits}/10 seeds (need 8); picks {picks:?}"))
}

/// Bars on a random-walk price path whose volume is
/// `level + slope * ADX(14) + noise`.
fn adx_driven_bars(n: usize, rng: &mut StdRng) -> BarSeries {
    let bars = random_walk_bars(&vec![1.0; n], 8, 0.01, rng);
    let adx = IndicatorSpec::with_default_window(IndicatorKind::Adx).compute(&bars);
    let noise = Normal::new(0.0, 5.0e4).unwrap();
    let new: Vec<Bar> = bars
        .bars()
        .iter()
        .zip(&adx)
        .map(|(b, a)| Bar { volume: 1.0e6 + 2.0e4 * a.unwrap_or(25.0) + noise.sample(rng), ..*b })
        .collect();
    BarSeries::new(new, bars.granularity()).unwrap()
}

fn stepwise_recovery() -> Verdict {
    let started = Instant::now();
    let mut first_hits = 0;
    let mut stop_hits = 0;
    let mut trails = Vec::new();
    let forecaster = SarimaxForecaster::new(ModelOrder::new(1, 0, 0).drift(true));
    for seed in 0..10u64 {
        let mut rng = StdRng::seed_from_u64(600 + seed);
        let bars = adx_driven_bars(600, &mut rng);
        let y = bars.volumes();
        let aligned = y.len() - (IndicatorSpec::with_default_window(IndicatorKind::Adx).warmup());
        let cfg = CvConfig::with_initial_fraction(aligned, 8, 0.5);
        let r = match forward_stepwise(&IndicatorSpec::defaults(), &forecaster, &y, &bars, &cfg) {
            Ok(r) => r,
            Err(e) => return Verdict::Fail(format!("seed {seed}: {e}")),
        };
        let first_ok = r.selected.first().is_some_and(|s| s.starts_with("ADX"));
        first_hits += usize::from(first_ok);
        stop_hits += usize::from(first_ok && r.selected.len() == 1);
        trails.push(r.selected.join("+"));
    }
    println!("    criterion 6 detail: selections {trails:?}");
    within_budget(
        stop_hits >= 8,
        format!("driver first in {first_hits}/10, driver alone in {stop_hits}/10 (need 8)"),
        started,
        Duration::from_secs(600),
    )
}

fn look_ahead_guard() -> Verdict {
    let mut rng = StdRng::seed_from_u64(700);
    let n = 240;
    let mut volumes: Vec<f64> = simulate_arma(&[0.5], &[], 1.0e5, n, &mut rng).iter().map(|v| v + 2.0e6).collect();
    let bars = random_walk_bars(&volumes, 8, 0.01, &mut rng);
    let specs = [IndicatorSpec::with_default_window(IndicatorKind::Mom)];
    let x_full = build_exog(&bars, &specs).unwrap();
    let from = x_full.valid_from();
    let mut x_cols = x_full.slice_rows(from..n).columns()[0].clone();
    volumes.drain(..from);
    let m = volumes.len();
    let forecaster = SarimaxForecaster::new(ModelOrder::new(1, 0, 0).drift(true));
    let cfg = CvConfig::new(8, 120);
    let matrix =
        |c: &[f64]| volcast::indicators::ExogMatrix::from_columns(vec!["MOM(10)".into()], vec![c.to_vec()]).unwrap();
    let base = rolling_origin_cv(&forecaster, &volumes, Some(&matrix(&x_cols)), &cfg).unwrap();

    let mut checked = 0;
    let mut violations = 0;
    for _ in 0..20 {
        let at = rng.random_range(cfg.initial_window..m);
        let mut y2 = volumes.clone();
        y2[at] *= rng.random_range(0.2..5.0);
        let saved = x_cols[at];
        x_cols[at] += rng.random_range(-50.0..50.0);
        let mutated = rolling_origin_cv(&forecaster, &y2, Some(&matrix(&x_cols)), &cfg).unwrap();
        x_cols[at] = saved;
        for (a, b) in base.folds.iter().zip(&mutated.folds) {
            if a.origin <= at {
                checked += 1;
                let same = a.forecasts.iter().zip(&b.forecasts).all(|(p, q)| p.to_bits() == q.to_bits());
                violations += usize::from(!same);
            }
        }
    }
    verdict(
        violations == 0 && checked > 0,
        format!("{checked} fold forecasts re-checked after 20 mutations, {violations} changed"),
    )
}

/// Intraday bars (8 per session) with a U-shaped volume profile and
/// multiplicative noise.
fn u_shaped_bars(days: usize, rng: &mut StdRng) -> BarSeries {
    let profile = [1.7, 1.15, 0.9, 0.8, 0.8, 0.9, 1.15, 1.8];
    let noise = Normal::new(0.0, 0.1).unwrap();
    let volumes: Vec<f64> = (0..days * 8).map(|t| 2.0e6 * profile[t % 8] * (1.0 + noise.sample(rng))).collect();
    random_walk_bars(&volumes, 8, 0.004, rng)
}

fn vwap_properties() -> Verdict {
    let mut rng = StdRng::seed_from_u64(800);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let k = rng.random_range(2..30usize);
        let prices: Vec<f64> = (0..k).map(|_| rng.random_range(50.0..150.0)).collect();
        let actual: Vec<f64> = (0..k).map(|_| rng.random_range(1.0..1e6)).collect();
        let c = rng.random_range(1e-3..1e3);
        let pred: Vec<f64> = actual.iter().map(|v| v * c).collect();
        worst = worst.max(vwap_error(&pred, &actual, &prices).unwrap().abs());
    }

    let bars = u_shaped_bars(130, &mut rng);
    let y = bars.volumes();
    let specs = [IndicatorSpec::with_default_window(IndicatorKind::Mom)];
    let x_full = build_exog(&bars, &specs).unwrap();
    // start at the first whole session after the warm-up
    let from = x_full.valid_from().div_ceil(8) * 8;
    let bars = BarSeries::new(bars.bars()[from..].to_vec(), bars.granularity()).unwrap();
    let y = &y[from..];
    let x = x_full.slice_rows(from..from + y.len());
    let forecaster = SarimaxForecaster::new(ModelOrder::new(1, 0, 0).seasonal(0, 1, 1, 8));
    let cfg = CvConfig::new(8, 40 * 8);
    let report = match rolling_origin_cv(&forecaster, y, Some(&x), &cfg) {
        Ok(r) => r,
        Err(e) => return Verdict::Fail(format!("backtest failed: {e}")),
    };
    let mut predicted = vec![None; y.len()];
    for f in &report.folds {
        for (j, v) in f.forecasts.iter().enumerate() {
            predicted[f.origin + j] = Some(*v);
        }
    }
    let weeks = group_by_iso_week(&bars);
    let (model_errors, _) = vwap_errors_by_period(&bars, &predicted, &weeks, 2).unwrap();
    let evaluated: Vec<&str> = model_errors.iter().map(|e| e.label.as_str()).collect();
    let weekly = period_vwaps(&bars, &weeks).unwrap();
    let in_eval = |p: usize| evaluated.contains(&weeks[p].label.as_str());
    let max_abs = |it: &mut dyn Iterator<Item = f64>| it.map(f64::abs).fold(0.0, f64::max);
    let model_max = max_abs(&mut model_errors.iter().map(|e| e.error));
    let no_change_max =
        max_abs(&mut baseline_vwap_no_change(&weekly).into_iter().filter(|b| in_eval(b.period)).map(|b| b.error));
    let rolling_max =
        max_abs(&mut baseline_vwap_rolling(&weekly, 3).into_iter().filter(|b| in_eval(b.period)).map(|b| b.error));

    verdict(
        worst < 1e-12 && model_max < no_change_max && model_max < rolling_max && !model_errors.is_empty(),
        format!(
            "proportional max |err| {worst:.1e}; weekly max |err| over {} weeks: model {model_max:.5}, no-change {no_change_max:.5}, 3-period rolling {rolling_max:.5}",
            model_errors.len()
        ),
    )
}

fn soft_replication() -> Verdict {
    let Ok(path) = std::env::var("VOLCAST_SPY_DAILY") else {
        return Verdict::Skip("set VOLCAST_SPY_DAILY to a daily SPY bar CSV to run".into());
    };
    let file = match std::fs::File::open(&path) {
        Ok(f) => f,
        Err(e) => return Verdict::Fail(format!("{path}: {e}")),
    };
    let bars = match volcast::ingest::parse_bars(file, &Default::default()) {
        Ok(b) => b,
        Err(e) => return Verdict::Fail(format!("{path}: {e}")),
    };
    let start = chrono::NaiveDate::from_ymd_opt(2023, 1, 1).unwrap();
    let end = chrono::NaiveDate::from_ymd_opt(2024, 5, 25).unwrap();
    let bars = volcast::ingest::restrict_window(&bars, start, end).unwrap();
    let y = bars.volumes();
    let (model, _) = match auto_order_search(&y, None, &SearchBounds::default(), Criterion::Aic, &FitOptions::default())
    {
        Ok(r) => r,
        Err(e) => return Verdict::Fail(format!("order search: {e}")),
    };
    let pq = model.order.p + model.order.q;
    let orders_ok = model.order.d == 1 && pq.abs_diff(5) <= 1;

    let specs = [IndicatorSpec::with_default_window(IndicatorKind::Mom)];
    let x = build_exog(&bars, &specs).unwrap();
    let from = x.valid_from();
    let y = &y[from..];
    let x = x.slice_rows(from..from + y.len());
    let forecaster = SarimaxForecaster::new(model.order);
    let cfg = CvConfig::with_initial_fraction(y.len(), 1, 0.5);
    let mape = rolling_origin_cv(&forecaster, y, Some(&x), &cfg).ok().and_then(|r| r.avg_mape).unwrap_or(f64::NAN);
    verdict(
        orders_ok && (mape - 0.198).abs() <= 0.05,
        format!("selected {}, ARIMAX(MOM) CV MAPE {mape:.3} (target 0.198 +/- 0.05)", model.order.label()),
    )
}

fn property_suites() -> Verdict {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(1000);
    let mut failures = Vec::new();

    for _ in 0..200 {
        let n = rng.random_range(30..120usize);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
        let spec =
            DifferenceSpec::new(rng.random_range(0..=2), rng.random_range(0..=1), rng.random_range(1..=8)).unwrap();
        let lost = spec.lost();
        if n <= lost {
            continue;
        }
        let w = difference(&y, &spec).unwrap();
        let back = integrate(&w, &spec, &y[..lost]).unwrap();
        let err = back.iter().zip(&y[lost..]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err > 1e-6 {
            failures.push(format!("round trip error {err:.1e}"));
        }

        let period = rng.random_range(2..=8usize);
        let dec = decompose_moving_average(&y, period).unwrap();
        for t in 0..n {
            if let (Some(tr), Some(e)) = (dec.trend[t], dec.irregular[t]) {
                if (tr + dec.seasonal[t] + e - y[t]).abs() > 1e-9 {
                    failures.push("decomposition not additive".into());
                }
            }
        }
        if dec.seasonal[..period].iter().sum::<f64>().abs() > 1e-9 {
            failures.push("seasonal component does not sum to zero".into());
        }

        let lag = 10.min(n - 1);
        let a = acf(&y, lag).unwrap();
        let p = pacf(&y, lag).unwrap();
        if a.values[0] != 1.0 || a.values.iter().chain(&p.values).any(|v| v.abs() > 1.0 + 1e-12) {
            failures.push("correlogram out of range".into());
        }
    }

    // PACF against autoregressions on small fixtures
    for _ in 0..20 {
        let n = rng.random_range(40..=200usize);
        let y = simulate_arma(&[0.5, -0.2], &[0.3], 1.0, n, &mut rng);
        let p = pacf(&y, 5).unwrap();
        for k in 1..=5 {
            let diff = (p.values[k] - padded_ols_partial(&y, k)).abs();
            if diff > 1e-6 {
                failures.push(format!("pacf lag {k} differs by {diff:.1e}"));
            }
        }
    }
    failures.dedup();
    within_budget(
        failures.is_empty(),
        if failures.is_empty() {
            "round trip, decomposition and correlogram properties hold".into()
        } else {
            failures.join("; ")
        },
        started,
        Duration::from_secs(30),
    )
}

/// Last coefficient of the order-`k` autoregression of the demeaned series
/// with out-of-sample values taken as zero.
fn padded_ols_partial(y: &[f64], k: usize) -> f64 {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let at = |t: isize| if t >= 0 && (t as usize) < n { y[t as usize] - mean } else { 0.0 };
    let x = DMatrix::from_fn(n + k, k, |t, j| at(t as isize - 1 - j as isize));
    let target = DVector::from_fn(n + k, |t, _| at(t as isize));
    (x.transpose() * &x).lu().solve(&(x.transpose() * target)).unwrap()[k - 1]
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("likelihood oracle equivalence", likelihood_oracle),
        ("parameter recovery", parameter_recovery),
        ("auto order search vs brute force", auto_vs_brute_force),
        ("spectral exactness", spectral_exactness),
        ("generative m-selection", m_selection),
        ("stepwise recovery", stepwise_recovery),
        ("look-ahead guard", look_ahead_guard),
        ("VWAP properties", vwap_properties),
        ("soft replication on daily SPY", soft_replication),
        ("round-trip, decomposition and correlogram properties", property_suites),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut hard_failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let number = i + 1;
        if only.is_some_and(|o| o != number) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Verdict::Fail("panicked".into()));
        let soft = number == 9;
        let (tag, detail) = match outcome {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                if !soft {
                    hard_failures += 1;
                }
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        let scope = if soft { " (soft)" } else { "" };
        println!("criterion {number}{scope} {name}: {tag} - {detail}");
    }
    if hard_failures > 0 {
        println!("{hard_failures} hard criteria failed");
        std::process::exit(1);
    }
}
