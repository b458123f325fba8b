//! Simulation helpers and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Coefficients `a` of `prod_i (1 - r_i B) = 1 - sum a_k B^k`.
pub fn ar_from_roots(inverse_roots: &[f64]) -> Vec<f64> {
    let mut poly = vec![1.0];
    for r in inverse_roots {
        let mut next = vec![0.0; poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= r * c;
        }
        poly = next;
    }
    poly[1..].iter().map(|c| -c).collect()
}

/// Coefficients `b` of `prod_i (1 + r_i B) = 1 + sum b_k B^k`.
pub fn ma_from_roots(inverse_roots: &[f64]) -> Vec<f64> {
    let neg: Vec<f64> = inverse_roots.iter().map(|r| -r).collect();
    ar_from_roots(&neg).iter().map(|c| -c).collect()
}

/// ARMA simulation `u_t = sum a_i u_{t-i} + e_t + sum b_j e_{t-j}` after a burn-in.
pub fn simulate_arma(ar: &[f64], ma: &[f64], sigma: f64, n: usize, rng: &mut StdRng) -> Vec<f64> {
    let burn = 500;
    let normal = Normal::new(0.0, sigma).unwrap();
    let total = n + burn;
    let e: Vec<f64> = (0..total).map(|_| normal.sample(rng)).collect();
    let mut u = vec![0.0; total];
    for t in 0..total {
        let mut v = e[t];
        for (i, a) in ar.iter().enumerate() {
            if t > i {
                v += a * u[t - 1 - i];
            }
        }
        for (j, b) in ma.iter().enumerate() {
            if t > j {
                v += b * e[t - 1 - j];
            }
        }
        u[t] = v;
    }
    u.split_off(burn)
}

pub fn white_noise(n: usize, sigma: f64, rng: &mut StdRng) -> Vec<f64> {
    let normal = Normal::new(0.0, sigma).unwrap();
    (0..n).map(|_| normal.sample(rng)).collect()
}

/// Autocovariances `gamma(0..n)` of a unit-variance ARMA process from a
/// long truncation of its MA(infinity) representation.
pub fn arma_autocovariance(ar: &[f64], ma: &[f64], n: usize) -> Vec<f64> {
    let terms = 4000;
    let mut psi = vec![0.0; terms];
    for j in 0..terms {
        let mut v = if j == 0 { 1.0 } else { ma.get(j - 1).copied().unwrap_or(0.0) };
        for (i, a) in ar.iter().enumerate() {
            if j > i {
                v += a * psi[j - 1 - i];
            }
        }
        psi[j] = v;
    }
    (0..n).map(|h| (0..terms - h).map(|j| psi[j] * psi[j + h]).sum()).collect()
}

/// Multivariate normal log-density of `u` with Toeplitz covariance `gamma`.
pub fn dense_gaussian_loglik(u: &[f64], gamma: &[f64]) -> f64 {
    let n = u.len();
    let cov = DMatrix::from_fn(n, n, |i, j| gamma[i.abs_diff(j)]);
    let chol = cov.cholesky().expect("autocovariance matrix is positive definite");
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let x = DVector::from_column_slice(u);
    let sol = chol.solve(&x);
    -0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * log_det - 0.5 * x.dot(&sol)
}

/// Random inverse roots in `(-bound, bound)`.
pub fn random_roots(k: usize, bound: f64, rng: &mut StdRng) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(-bound..bound)).collect()
}

/// Trading days (Mon-Fri) from 2024-01-01 with `per_day` hourly bars each,
/// the first at 14:30 UTC.
pub fn trading_timestamps(days: usize, per_day: usize) -> Vec<chrono::DateTime<chrono::Utc>> {
    use chrono::{Datelike, Duration, NaiveDate, TimeZone, Utc, Weekday};
    let mut out = Vec::with_capacity(days * per_day);
    let mut date = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
    let mut made = 0;
    while made < days {
        if !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            let open = Utc.from_utc_datetime(&date.and_hms_opt(14, 30, 0).unwrap());
            out.extend((0..per_day).map(|k| open + Duration::hours(k as i64)));
            made += 1;
        }
        date += Duration::days(1);
    }
    out
}

/// Geometric random-walk OHLC bars carrying the given volumes.
pub fn random_walk_bars(volumes: &[f64], per_day: usize, step_sd: f64, rng: &mut StdRng) -> volcast::ingest::BarSeries {
    use volcast::ingest::{Bar, BarSeries, Granularity};
    let n = volumes.len();
    let days = n.div_ceil(per_day);
    let stamps = trading_timestamps(days, per_day);
    let normal = Normal::new(0.0, step_sd).unwrap();
    let mut close = 100.0;
    let bars = (0..n)
        .map(|t| {
            let open: f64 = close;
            close = open * normal.sample(rng).exp();
            let wick = 1.0 + step_sd * rng.random_range(0.0..1.0);
            Bar {
                timestamp: stamps[t],
                open,
                high: open.max(close) * wick,
                low: open.min(close) / wick,
                close,
                volume: volumes[t],
            }
        })
        .collect();
    let granularity = if per_day == 1 { Granularity::Daily } else { Granularity::Intraday };
    BarSeries::new(bars, granularity).unwrap()
}
