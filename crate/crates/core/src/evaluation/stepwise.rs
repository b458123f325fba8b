use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rolling_origin_cv, CvConfig, Forecaster};
use crate::error::{Error, Result};
use crate::indicators::{build_exog, IndicatorSpec};
use crate::ingest::BarSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrailEntry {
    pub covariates: Vec<String>,
    pub avg_mse: f64,
    pub avg_mape: Option<f64>,
    pub failed_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepwiseResult {
    /// Covariates in the order they were added.
    pub selected: Vec<String>,
    /// The accepted model at each round, starting with no covariates.
    pub trail: Vec<TrailEntry>,
    /// Every candidate set evaluated, round by round.
    pub evaluated: Vec<TrailEntry>,
    /// First row of the input used; earlier rows fall in some indicator's warm-up.
    pub aligned_from: usize,
}

/// Greedy forward selection of indicator covariates by cross-validated
/// average MSE.
///
/// All candidate indicators are computed once and every model, including the
/// one without covariates, is evaluated on the rows where all of them are
/// defined, so that scores are comparable. `cfg` refers to that aligned
/// series. Selection stops when no remaining candidate strictly lowers the
/// average MSE.
pub fn forward_stepwise(
    candidates: &[IndicatorSpec],
    forecaster: &dyn Forecaster,
    y: &[f64],
    bars: &BarSeries,
    cfg: &CvConfig,
) -> Result<StepwiseResult> {
    if candidates.is_empty() {
        return Err(Error::InvalidValue("forward stepwise needs at least one candidate".into()));
    }
    if bars.len() != y.len() {
        return Err(Error::Shape(format!("{} bars for {} observations", bars.len(), y.len())));
    }
    let all = build_exog(bars, candidates)?;
    let from = all.valid_from();
    let y = &y[from..];
    let all = all.slice_rows(from..from + y.len());
    let names = all.names().to_vec();

    let null = rolling_origin_cv(forecaster, y, None, cfg)?;
    let mut current = TrailEntry {
        covariates: vec![],
        avg_mse: null.avg_mse,
        avg_mape: null.avg_mape,
        failed_folds: null.failed.len(),
    };
    let mut trail = vec![current.clone()];
    let mut evaluated = vec![current.clone()];
    let mut chosen: Vec<usize> = Vec::new();

    loop {
        let remaining: Vec<usize> = (0..names.len()).filter(|j| !chosen.contains(j)).collect();
        if remaining.is_empty() {
            break;
        }
        let round: Vec<(usize, TrailEntry)> = remaining
            .par_iter()
            .map(|&j| {
                let mut idx = chosen.clone();
                idx.push(j);
                let x = all.select(&idx);
                let r = rolling_origin_cv(forecaster, y, Some(&x), cfg)?;
                Ok((
                    j,
                    TrailEntry {
                        covariates: idx.iter().map(|&i| names[i].clone()).collect(),
                        avg_mse: r.avg_mse,
                        avg_mape: r.avg_mape,
                        failed_folds: r.failed.len(),
                    },
                ))
            })
            .collect::<Result<_>>()?;
        evaluated.extend(round.iter().map(|(_, e)| e.clone()));
        // ties go to the earlier candidate
        let best = round.iter().fold(None::<&(usize, TrailEntry)>, |acc, c| match acc {
            Some(a) if a.1.avg_mse <= c.1.avg_mse => Some(a),
            _ => Some(c),
        });
        match best {
            Some((j, entry)) if entry.avg_mse < current.avg_mse => {
                chosen.push(*j);
                current = entry.clone();
                trail.push(current.clone());
            }
            _ => break,
        }
    }
    Ok(StepwiseResult {
        selected: chosen.iter().map(|&j| names[j].clone()).collect(),
        trail,
        evaluated,
        aligned_from: from,
    })
}
