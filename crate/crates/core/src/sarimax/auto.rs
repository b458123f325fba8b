//! Stepwise order selection by information criterion.
//!
//! The differencing orders are fixed first: `D` from the strength of the
//! seasonal component, then `d` by repeated KPSS tests on the seasonally
//! differenced series. The ARMA orders are then searched by moving from a
//! small set of starting models to the best neighbouring model until no
//! neighbour improves the criterion.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimate::{fit, FitOptions};
use super::{FittedModel, ModelOrder};
use crate::diagnostics::decompose_moving_average;
use crate::error::{Error, Result};
use crate::indicators::ExogMatrix;
use crate::series::{difference, DifferenceSpec};

/// 5% critical value of the level-stationarity KPSS statistic.
const KPSS_CRITICAL: f64 = 0.463;
/// Seasonal strength above which one seasonal difference is taken.
const SEASONAL_STRENGTH_THRESHOLD: f64 = 0.64;
const MAX_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    Aic,
    Bic,
}

impl Criterion {
    pub fn score(self, model: &FittedModel) -> f64 {
        match self {
            Criterion::Aic => model.aic,
            Criterion::Bic => model.bic(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub max_p: usize,
    pub max_q: usize,
    pub max_seasonal_p: usize,
    pub max_seasonal_q: usize,
    pub max_d: usize,
    pub max_seasonal_d: usize,
    /// Fixed differencing orders; chosen from the data when `None`.
    pub d: Option<usize>,
    pub seasonal_d: Option<usize>,
    pub period: usize,
    /// Whether a constant may be included (only when `d + D <= 1`).
    pub allow_drift: bool,
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self {
            max_p: 3,
            max_q: 3,
            max_seasonal_p: 2,
            max_seasonal_q: 2,
            max_d: 1,
            max_seasonal_d: 1,
            d: None,
            seasonal_d: None,
            period: 1,
            allow_drift: true,
        }
    }
}

impl SearchBounds {
    pub fn seasonal(period: usize) -> Self {
        Self { period, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub order: String,
    pub with_drift: bool,
    pub score: Option<f64>,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchLog {
    pub d: usize,
    pub seasonal_d: usize,
    /// Every candidate fitted, in evaluation order.
    pub candidates: Vec<CandidateRecord>,
}

/// KPSS statistic for level stationarity with a Bartlett long-run variance
/// at lag `floor(4 (n/100)^(1/4))`.
pub fn kpss_statistic(y: &[f64]) -> f64 {
    let n = y.len();
    if n < 2 {
        return 0.0;
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let e: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let mut partial = 0.0;
    let mut eta = 0.0;
    for v in &e {
        partial += v;
        eta += partial * partial;
    }
    let nf = n as f64;
    eta /= nf * nf;
    let lag = ((4.0 * (nf / 100.0).powf(0.25)) as usize).min(n - 1);
    let gamma = |k: usize| e[k..].iter().zip(&e).map(|(a, b)| a * b).sum::<f64>() / nf;
    let mut lrv = gamma(0);
    for k in 1..=lag {
        lrv += 2.0 * (1.0 - k as f64 / (lag as f64 + 1.0)) * gamma(k);
    }
    if lrv <= 0.0 {
        0.0
    } else {
        eta / lrv
    }
}

/// `max(0, 1 - Var(irregular) / Var(seasonal + irregular))` from the
/// moving-average decomposition, over the region where the trend is defined.
pub fn seasonal_strength(y: &[f64], period: usize) -> Result<f64> {
    let dec = decompose_moving_average(y, period)?;
    let mut irr = Vec::new();
    let mut detrended = Vec::new();
    for (t, e) in dec.irregular.iter().enumerate() {
        if let Some(e) = e {
            irr.push(*e);
            detrended.push(dec.seasonal[t] + e);
        }
    }
    let var = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
    };
    let total = var(&detrended);
    if total <= 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - var(&irr) / total).max(0.0))
}

fn choose_differencing(y: &[f64], bounds: &SearchBounds) -> Result<(usize, usize)> {
    let seasonal_d = match bounds.seasonal_d {
        Some(v) => v,
        None if bounds.period > 1 && bounds.max_seasonal_d > 0 && y.len() >= 2 * bounds.period => {
            usize::from(seasonal_strength(y, bounds.period)? > SEASONAL_STRENGTH_THRESHOLD)
        }
        None => 0,
    };
    let d = match bounds.d {
        Some(v) => v,
        None => {
            let mut x = difference(y, &DifferenceSpec { d: 0, seasonal_d, period: bounds.period.max(1) })?;
            let mut d = 0;
            while d < bounds.max_d && x.len() > 2 && kpss_statistic(&x) > KPSS_CRITICAL {
                x = difference(&x, &DifferenceSpec { d: 1, seasonal_d: 0, period: 1 })?;
                d += 1;
            }
            d
        }
    };
    Ok((d, seasonal_d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    p: usize,
    q: usize,
    sp: usize,
    sq: usize,
    drift: bool,
}

/// Stepwise search over ARMA orders; returns the best model and a log of
/// every candidate tried.
pub fn auto_order_search(
    y: &[f64],
    x: Option<&ExogMatrix>,
    bounds: &SearchBounds,
    criterion: Criterion,
    opts: &FitOptions,
) -> Result<(FittedModel, SearchLog)> {
    if bounds.period == 0 {
        return Err(Error::InvalidValue("seasonal period must be >= 1".into()));
    }
    let seasonal = bounds.period > 1;
    let (d, seasonal_d) = choose_differencing(y, bounds)?;
    let drift_ok = bounds.allow_drift && d + seasonal_d <= 1;
    let (max_sp, max_sq) = if seasonal { (bounds.max_seasonal_p, bounds.max_seasonal_q) } else { (0, 0) };
    let within = |k: &Key| {
        k.p <= bounds.max_p && k.q <= bounds.max_q && k.sp <= max_sp && k.sq <= max_sq && (drift_ok || !k.drift)
    };

    let order_of = |k: &Key| {
        let o = ModelOrder::new(k.p, d, k.q).drift(k.drift);
        if seasonal {
            o.seasonal(k.sp, seasonal_d, k.sq, bounds.period)
        } else {
            o
        }
    };

    let mut cache: HashMap<Key, std::result::Result<FittedModel, String>> = HashMap::new();
    let mut log = SearchLog { d, seasonal_d, candidates: Vec::new() };
    let evaluate = |keys: Vec<Key>, cache: &mut HashMap<Key, _>, log: &mut SearchLog| {
        let mut fresh: Vec<Key> = Vec::new();
        for k in keys {
            if within(&k) && !cache.contains_key(&k) && !fresh.contains(&k) {
                fresh.push(k);
            }
        }
        let results: Vec<(Key, std::result::Result<FittedModel, String>)> = fresh
            .par_iter()
            .map(|k| {
                let r = match fit(&order_of(k), y, x, opts) {
                    Ok(m) => Ok(m),
                    Err(Error::Convergence { best, .. }) => Ok(*best),
                    Err(e) => Err(e.to_string()),
                };
                (*k, r)
            })
            .collect();
        for (k, r) in results {
            let order = order_of(&k);
            log.candidates.push(match &r {
                Ok(m) => CandidateRecord {
                    order: order.to_string(),
                    with_drift: k.drift,
                    score: Some(criterion.score(m)),
                    converged: m.fit_diagnostics.converged,
                    error: None,
                },
                Err(e) => CandidateRecord {
                    order: order.to_string(),
                    with_drift: k.drift,
                    score: None,
                    converged: false,
                    error: Some(e.clone()),
                },
            });
            cache.insert(k, r);
        }
    };

    let clamp = |p: usize, q: usize, sp: usize, sq: usize| Key {
        p: p.min(bounds.max_p),
        q: q.min(bounds.max_q),
        sp: sp.min(max_sp),
        sq: sq.min(max_sq),
        drift: drift_ok,
    };
    let starts = vec![clamp(1, 1, 1, 1), clamp(0, 0, 0, 0), clamp(1, 0, 1, 0), clamp(0, 1, 0, 1), clamp(2, 2, 1, 1)];
    evaluate(starts.clone(), &mut cache, &mut log);

    let score_of = |cache: &HashMap<Key, std::result::Result<FittedModel, String>>, k: &Key| {
        cache.get(k).and_then(|r| r.as_ref().ok()).map(|m| criterion.score(m)).filter(|s| s.is_finite())
    };
    let pick_best = |cache: &HashMap<Key, _>, keys: &[Key]| -> Option<(Key, f64)> {
        keys.iter().filter_map(|k| score_of(cache, k).map(|s| (*k, s))).min_by(|a, b| a.1.total_cmp(&b.1))
    };

    let Some((mut current, mut current_score)) = pick_best(&cache, &starts) else {
        let failures =
            log.candidates.iter().map(|c| format!("{}: {}", c.order, c.error.clone().unwrap_or_default())).collect();
        return Err(Error::Search { failures });
    };

    for _ in 0..MAX_STEPS {
        let neighbours = neighbours(&current, seasonal);
        evaluate(neighbours.clone(), &mut cache, &mut log);
        match pick_best(&cache, &neighbours) {
            Some((k, s)) if s < current_score => {
                current = k;
                current_score = s;
            }
            _ => break,
        }
    }
    let best = cache.remove(&current).expect("current model cached").expect("current model fitted");
    Ok((best, log))
}

fn neighbours(k: &Key, seasonal: bool) -> Vec<Key> {
    let mut out = Vec::new();
    let step = |v: usize, delta: i64| -> Option<usize> { usize::try_from(v as i64 + delta).ok() };
    for delta in [-1i64, 1] {
        if let Some(p) = step(k.p, delta) {
            out.push(Key { p, ..*k });
        }
        if let Some(q) = step(k.q, delta) {
            out.push(Key { q, ..*k });
        }
        if let (Some(p), Some(q)) = (step(k.p, delta), step(k.q, delta)) {
            out.push(Key { p, q, ..*k });
        }
        if seasonal {
            if let Some(sp) = step(k.sp, delta) {
                out.push(Key { sp, ..*k });
            }
            if let Some(sq) = step(k.sq, delta) {
                out.push(Key { sq, ..*k });
            }
            if let (Some(sp), Some(sq)) = (step(k.sp, delta), step(k.sq, delta)) {
                out.push(Key { sp, sq, ..*k });
            }
        }
    }
    out.push(Key { drift: !k.drift, ..*k });
    out
}
