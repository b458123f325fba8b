use serde::{Deserialize, Serialize};

use super::estimate::{difference_inputs, regression_residuals, state_space};
use super::transform::{expand_ar, expand_ma};
use super::FittedModel;
use crate::error::{Error, Result};
use crate::indicators::ExogMatrix;
use crate::series::{difference, integrate, poly_mul};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastPoint {
    pub mean: f64,
    /// Standard error of the `j`-step forecast error.
    pub se: f64,
}

/// Forecasts `horizon` steps past the end of `y`.
///
/// `x_past` must cover the same rows as `y`; `x_future` supplies at least
/// `horizon` rows of covariates for the forecast period. Conditional means
/// are computed on the differenced scale from the filtered state and then
/// integrated back to levels.
pub fn forecast(
    model: &FittedModel,
    y: &[f64],
    x_past: Option<&ExogMatrix>,
    horizon: usize,
    x_future: Option<&ExogMatrix>,
) -> Result<Vec<ForecastPoint>> {
    let k = model.exog_names.len();
    if horizon == 0 {
        return Ok(Vec::new());
    }
    if k > 0 {
        let got = x_future.map_or(0, ExogMatrix::n_rows);
        if got < horizon || x_future.map_or(0, ExogMatrix::n_cols) != k {
            return Err(Error::ExogHorizon { expected: k, got, horizon });
        }
        if x_past.map_or(0, ExogMatrix::n_cols) != k {
            return Err(Error::Shape(format!(
                "model has {k} exogenous columns, past matrix has {}",
                x_past.map_or(0, ExogMatrix::n_cols)
            )));
        }
    }
    let x_past = if k > 0 { x_past } else { None };
    let order = &model.order;
    let params = &model.params;
    let spec = order.difference_spec();

    let data = difference_inputs(order, y, x_past)?;
    let u = regression_residuals(&data.w, &data.xd, params.delta, &params.beta);
    let ss = state_space(order, params);
    let filtered = ss.filter(&u)?;

    // Differenced future covariates, continuing the past columns.
    let future_xd: Vec<Vec<f64>> = match (x_past, x_future) {
        (Some(past), Some(future)) => past
            .columns()
            .iter()
            .zip(future.columns())
            .map(|(p, f)| {
                let joined: Vec<f64> = p.iter().chain(&f[..horizon]).copied().collect();
                let d = difference(&joined, &spec)?;
                Ok(d[d.len() - horizon..].to_vec())
            })
            .collect::<Result<_>>()?,
        _ => Vec::new(),
    };
    if future_xd.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidValue("future covariates contain undefined values".into()));
    }

    let mut state = filtered.state;
    let mut w_future = Vec::with_capacity(horizon);
    for j in 0..horizon {
        let mut w = params.delta + state[0];
        for (col, b) in future_xd.iter().zip(&params.beta) {
            w += b * col[j];
        }
        w_future.push(w);
        state = ss.advance_state(&state);
    }
    let means = integrate(&w_future, &spec, y)?;

    let psi = psi_weights(model, horizon);
    let mut acc = 0.0;
    Ok(means
        .into_iter()
        .zip(psi)
        .map(|(mean, p)| {
            acc += p * p;
            ForecastPoint { mean, se: (params.sigma2 * acc).sqrt() }
        })
        .collect())
}

/// First `n` weights of `theta(B) Theta(B^s) / (phi(B) Phi(B^s) (1-B)^d (1-B^s)^D)`.
pub(crate) fn psi_weights(model: &FittedModel, n: usize) -> Vec<f64> {
    let order = &model.order;
    let p = &model.params;
    let ar_poly: Vec<f64> =
        std::iter::once(1.0).chain(expand_ar(&p.phi, &p.seasonal_phi, order.period).iter().map(|v| -v)).collect();
    // full operator 1 + sum c_k B^k; psi_j = b_j - sum c_k psi_{j-k}
    let full = poly_mul(&ar_poly, &order.difference_spec().polynomial());
    let ma = expand_ma(&p.theta, &p.seasonal_theta, order.period);
    let mut psi = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = if j == 0 { 1.0 } else { ma.get(j - 1).copied().unwrap_or(0.0) };
        for (k, c) in full.iter().enumerate().skip(1).take(j) {
            v -= c * psi[j - k];
        }
        psi.push(v);
    }
    psi
}
