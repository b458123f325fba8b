use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::kalman::ArmaStateSpace;
use super::transform::{constrain_ar, constrain_ma, expand_ar, expand_ma, unconstrain_ar, unconstrain_ma};
use super::{FitDiagnostics, FittedModel, ModelOrder, SarimaxParams};
use crate::error::{Error, Result};
use crate::indicators::ExogMatrix;
use crate::linalg::least_squares;
use crate::optim::{nelder_mead, Minimum, NelderMeadOptions};
use crate::series::difference;

/// Lower bound on the innovation variance.
pub(crate) const SIGMA2_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    pub rel_tol: f64,
    /// Jittered restarts after the first maximum-likelihood run.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 2000, rel_tol: 1e-8, restarts: 3, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogRegression {
    pub intercept: f64,
    /// One coefficient per input column; pruned columns get 0.
    pub beta: Vec<f64>,
    pub residuals: Vec<f64>,
    pub pruned: Vec<String>,
}

fn check_exog(n: usize, x: Option<&ExogMatrix>) -> Result<()> {
    if let Some(x) = x {
        if x.n_rows() != n {
            return Err(Error::Shape(format!("exogenous matrix has {} rows, series has {n}", x.n_rows())));
        }
        if x.valid_from() > 0 {
            return Err(Error::Shape(format!(
                "exogenous columns are undefined before row {}; slice both inputs from there",
                x.valid_from()
            )));
        }
    }
    Ok(())
}

fn is_zero_column(c: &[f64]) -> bool {
    c.iter().all(|v| *v == 0.0)
}

/// Least squares of `y` on an intercept and the columns of `x`.
///
/// All-zero columns are pruned (coefficient 0). Rank deficiency among the
/// remaining columns is a [`Error::Collinear`] naming the offending column.
pub fn regress_out_exog(y: &[f64], x: &ExogMatrix) -> Result<ExogRegression> {
    check_exog(y.len(), Some(x))?;
    let mut names = vec!["intercept".to_string()];
    let mut cols = vec![vec![1.0; y.len()]];
    let mut active = Vec::new();
    let mut pruned = Vec::new();
    for (j, c) in x.columns().iter().enumerate() {
        if is_zero_column(c) {
            pruned.push(x.names()[j].clone());
        } else {
            active.push(j);
            names.push(x.names()[j].clone());
            cols.push(c.clone());
        }
    }
    let ls = least_squares(&cols, &names, y)?;
    let mut beta = vec![0.0; x.n_cols()];
    for (slot, &j) in active.iter().enumerate() {
        beta[j] = ls.coef[slot + 1];
    }
    Ok(ExogRegression { intercept: ls.coef[0], beta, residuals: ls.residuals, pruned })
}

/// Differenced regression data shared by likelihood evaluation and fitting.
pub(crate) struct Differenced {
    pub w: Vec<f64>,
    /// Differenced exogenous columns, all of them (including pruned ones).
    pub xd: Vec<Vec<f64>>,
}

pub(crate) fn difference_inputs(order: &ModelOrder, y: &[f64], x: Option<&ExogMatrix>) -> Result<Differenced> {
    let spec = order.difference_spec();
    let w = difference(y, &spec)?;
    let xd = match x {
        Some(x) => x.columns().iter().map(|c| difference(c, &spec)).collect::<Result<_>>()?,
        None => Vec::new(),
    };
    Ok(Differenced { w, xd })
}

/// `u_t = w_t - delta - sum beta_j x_{j,t}`.
pub(crate) fn regression_residuals(w: &[f64], xd: &[Vec<f64>], delta: f64, beta: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = w.iter().map(|v| v - delta).collect();
    for (col, b) in xd.iter().zip(beta) {
        if *b != 0.0 {
            for (ut, xt) in u.iter_mut().zip(col) {
                *ut -= b * xt;
            }
        }
    }
    u
}

/// Exact Gaussian log-likelihood of `y` (differenced internally) under the
/// given parameters.
pub fn log_likelihood(order: &ModelOrder, params: &SarimaxParams, y: &[f64], x: Option<&ExogMatrix>) -> Result<f64> {
    order.validate()?;
    check_exog(y.len(), x)?;
    params.check_shape(order, x.map_or(0, ExogMatrix::n_cols))?;
    params.check_admissible()?;
    let data = difference_inputs(order, y, x)?;
    let u = regression_residuals(&data.w, &data.xd, params.delta, &params.beta);
    let ss = state_space(order, params);
    Ok(ss.filter(&u)?.loglik(params.sigma2))
}

pub(crate) fn state_space(order: &ModelOrder, params: &SarimaxParams) -> ArmaStateSpace {
    ArmaStateSpace::new(
        &expand_ar(&params.phi, &params.seasonal_phi, order.period),
        &expand_ma(&params.theta, &params.seasonal_theta, order.period),
    )
}

/// Position of each parameter block in the optimizer's vector.
struct Layout {
    order: ModelOrder,
    n_active: usize,
}

struct Unpacked {
    phi: Vec<f64>,
    theta: Vec<f64>,
    seasonal_phi: Vec<f64>,
    seasonal_theta: Vec<f64>,
    delta: f64,
    beta: Vec<f64>,
}

impl Layout {
    fn len(&self) -> usize {
        self.order.n_arma() + usize::from(self.order.with_drift) + self.n_active
    }

    fn unpack(&self, v: &[f64]) -> Unpacked {
        let o = &self.order;
        let mut at = 0;
        let mut take = |n: usize| {
            let s = &v[at..at + n];
            at += n;
            s
        };
        let phi = constrain_ar(take(o.p));
        let theta = constrain_ma(take(o.q));
        let seasonal_phi = constrain_ar(take(o.seasonal_p));
        let seasonal_theta = constrain_ma(take(o.seasonal_q));
        let delta = if o.with_drift { take(1)[0] } else { 0.0 };
        let beta = take(self.n_active).to_vec();
        Unpacked { phi, theta, seasonal_phi, seasonal_theta, delta, beta }
    }

    fn pack(&self, u: &Unpacked) -> Vec<f64> {
        const LIMIT: f64 = 0.95;
        let mut v = Vec::with_capacity(self.len());
        v.extend(unconstrain_ar(&u.phi, LIMIT));
        v.extend(unconstrain_ma(&u.theta, LIMIT));
        v.extend(unconstrain_ar(&u.seasonal_phi, LIMIT));
        v.extend(unconstrain_ma(&u.seasonal_theta, LIMIT));
        if self.order.with_drift {
            v.push(u.delta);
        }
        v.extend(&u.beta);
        v
    }
}

/// Conditional sum of squares: residuals of the expanded ARMA recursion
/// started at zero after the first `p + sP` observations.
fn css_sum_of_squares(u: &[f64], ar: &[f64], ma: &[f64]) -> (f64, usize) {
    let start = ar.len();
    let mut e = vec![0.0; u.len()];
    let mut ss = 0.0;
    for t in start..u.len() {
        let mut v = u[t];
        for (i, a) in ar.iter().enumerate() {
            v -= a * u[t - 1 - i];
        }
        for (j, b) in ma.iter().enumerate() {
            if t > j {
                v -= b * e[t - 1 - j];
            }
        }
        e[t] = v;
        ss += v * v;
    }
    (ss, u.len().saturating_sub(start))
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len().max(1) as f64).sqrt()
}

/// Maximum-likelihood fit of `order` to `y` with optional covariates.
///
/// Covariates enter as a regression with SARIMA errors: both `y` and the
/// columns of `x` are differenced, the regression coefficients start from
/// OLS and are refined jointly with the ARMA coefficients. Columns that
/// vanish after differencing are pruned with a zero coefficient.
pub fn fit(order: &ModelOrder, y: &[f64], x: Option<&ExogMatrix>, opts: &FitOptions) -> Result<FittedModel> {
    order.validate()?;
    check_exog(y.len(), x)?;
    let n_exog = x.map_or(0, ExogMatrix::n_cols);
    let exog_names: Vec<String> = x.map(|x| x.names().to_vec()).unwrap_or_default();
    let data = difference_inputs(order, y, x)?;
    let m = data.w.len();

    let active: Vec<usize> = (0..n_exog).filter(|&j| !is_zero_column(&data.xd[j])).collect();
    let pruned_exog: Vec<String> = (0..n_exog).filter(|j| !active.contains(j)).map(|j| exog_names[j].clone()).collect();
    let layout = Layout { order: *order, n_active: active.len() };
    let n_params = layout.len() + 1;
    if m <= n_params + 1 {
        return Err(Error::TooShort { needed: order.difference_spec().lost() + n_params + 2, got: y.len() });
    }

    // Work on a rescaled problem so one simplex step size suits every block.
    let w_scale = match rms(&data.w) {
        s if s > 0.0 && s.is_finite() => s,
        _ => 1.0,
    };
    let ws: Vec<f64> = data.w.iter().map(|v| v / w_scale).collect();
    let x_scales: Vec<f64> = active.iter().map(|&j| rms(&data.xd[j])).collect();
    let xs: Vec<Vec<f64>> =
        active.iter().zip(&x_scales).map(|(&j, s)| data.xd[j].iter().map(|v| v / s).collect()).collect();

    let mut names = Vec::new();
    let mut cols = Vec::new();
    if order.with_drift {
        names.push("intercept".to_string());
        cols.push(vec![1.0; m]);
    }
    for (slot, &j) in active.iter().enumerate() {
        names.push(exog_names[j].clone());
        cols.push(xs[slot].clone());
    }
    let ols = least_squares(&cols, &names, &ws)?;
    let (delta0, beta0) =
        if order.with_drift { (ols.coef[0], ols.coef[1..].to_vec()) } else { (0.0, ols.coef.clone()) };

    let floor = SIGMA2_FLOOR / (w_scale * w_scale);
    let residuals = |p: &Unpacked| regression_residuals(&ws, &xs, p.delta, &p.beta);

    let css_objective = |v: &[f64]| {
        let p = layout.unpack(v);
        let ar = expand_ar(&p.phi, &p.seasonal_phi, order.period);
        let ma = expand_ma(&p.theta, &p.seasonal_theta, order.period);
        let (ss, n_eff) = css_sum_of_squares(&residuals(&p), &ar, &ma);
        0.5 * n_eff as f64 * (ss / n_eff as f64).max(floor).ln()
    };
    let ml_objective = |v: &[f64]| -> f64 {
        let p = layout.unpack(v);
        let ss = ArmaStateSpace::new(
            &expand_ar(&p.phi, &p.seasonal_phi, order.period),
            &expand_ma(&p.theta, &p.seasonal_theta, order.period),
        );
        match ss.filter(&residuals(&p)) {
            Ok(out) => -out.loglik(out.sigma2_hat(floor)),
            Err(_) => f64::NAN,
        }
    };

    let nm = NelderMeadOptions { max_iter: opts.max_iter, rel_tol: opts.rel_tol, step: 0.1 };
    let zero_start = layout.pack(&Unpacked {
        phi: vec![0.0; order.p],
        theta: vec![0.0; order.q],
        seasonal_phi: vec![0.0; order.seasonal_p],
        seasonal_theta: vec![0.0; order.seasonal_q],
        delta: delta0,
        beta: beta0,
    });
    let css = nelder_mead(css_objective, &zero_start, &nm);
    let css_start = layout.pack(&layout.unpack(&css.x));
    let start = if ml_objective(&css_start).is_finite() { css_start } else { zero_start };

    let mut iterations = css.iterations;
    let mut best: Minimum = nelder_mead(ml_objective, &start, &nm);
    iterations += best.iterations;
    let mut rng = StdRng::seed_from_u64(opts.seed);
    let jitter = Normal::new(0.0, 0.2).expect("valid normal");
    for _ in 0..opts.restarts {
        let from: Vec<f64> = best.x.iter().map(|v| v + jitter.sample(&mut rng)).collect();
        let run = nelder_mead(ml_objective, &from, &nm);
        iterations += run.iterations;
        if run.value < best.value {
            best = run;
        }
    }
    if !best.converged {
        let polish = nelder_mead(ml_objective, &best.x, &nm);
        iterations += polish.iterations;
        if polish.value <= best.value {
            best = polish;
        }
    }

    let p = layout.unpack(&best.x);
    let ss = ArmaStateSpace::new(
        &expand_ar(&p.phi, &p.seasonal_phi, order.period),
        &expand_ma(&p.theta, &p.seasonal_theta, order.period),
    );
    let out = ss.filter(&residuals(&p))?;
    let sigma2_scaled = out.sigma2_hat(floor);
    let loglik = out.loglik(sigma2_scaled) - m as f64 * w_scale.ln();

    let mut beta = vec![0.0; n_exog];
    for (slot, &j) in active.iter().enumerate() {
        beta[j] = p.beta[slot] * w_scale / x_scales[slot];
    }
    let params = SarimaxParams {
        phi: p.phi,
        theta: p.theta,
        seasonal_phi: p.seasonal_phi,
        seasonal_theta: p.seasonal_theta,
        delta: p.delta * w_scale,
        beta,
        sigma2: (sigma2_scaled * w_scale * w_scale).max(SIGMA2_FLOOR),
    };
    let model = FittedModel {
        order: *order,
        params,
        loglik,
        aic: 2.0 * n_params as f64 - 2.0 * loglik,
        n_obs: m,
        exog_names,
        pruned_exog,
        fit_diagnostics: FitDiagnostics { iterations, converged: best.converged, restarts: opts.restarts },
    };
    if !model.loglik.is_finite() {
        return Err(Error::Domain(format!("log-likelihood of {} is not finite", order)));
    }
    if !best.converged {
        return Err(Error::Convergence { restarts: opts.restarts, best: Box::new(model) });
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_exog_regression_is_demeaning() {
        let y = [1.0, 4.0, 2.0, 7.0];
        let x = ExogMatrix::from_columns(vec!["z".into()], vec![vec![0.0; 4]]).unwrap();
        let r = regress_out_exog(&y, &x).unwrap();
        assert_eq!(r.pruned, vec!["z".to_string()]);
        assert_eq!(r.beta, vec![0.0]);
        for (res, v) in r.residuals.iter().zip(y) {
            assert_abs_diff_eq!(*res, v - 3.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn exact_linear_fit_recovers_beta() {
        let xc: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin() + 0.1 * i as f64).collect();
        let y: Vec<f64> = xc.iter().map(|v| 5.0 + 2.5 * v).collect();
        let x = ExogMatrix::from_columns(vec!["x".into()], vec![xc]).unwrap();
        let r = regress_out_exog(&y, &x).unwrap();
        assert_abs_diff_eq!(r.beta[0], 2.5, epsilon = 1e-8);
        assert!(r.residuals.iter().all(|e| e.abs() < 1e-8));
    }

    #[test]
    fn collinear_exog_named() {
        let a: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        let x = ExogMatrix::from_columns(vec!["a".into(), "b".into()], vec![a, b]).unwrap();
        assert!(matches!(regress_out_exog(&[1.0; 10], &x), Err(Error::Collinear { ref column }) if column == "b"));
    }

    #[test]
    fn exog_with_warmup_rejected() {
        let x = ExogMatrix::from_columns(vec!["a".into()], vec![vec![f64::NAN, 1.0, 2.0]]).unwrap();
        assert!(matches!(regress_out_exog(&[1.0, 2.0, 3.0], &x), Err(Error::Shape(_))));
    }

    #[test]
    fn css_of_white_noise_is_plain_sum() {
        let (ss, n) = css_sum_of_squares(&[1.0, 2.0, 3.0], &[], &[]);
        assert_eq!((ss, n), (14.0, 3));
    }

    #[test]
    fn white_noise_zeros_loglik() {
        let order = ModelOrder::new(0, 0, 0);
        let params = SarimaxParams::zeros(&order, 0);
        let n = 25;
        let ll = log_likelihood(&order, &params, &vec![0.0; n], None).unwrap();
        assert_abs_diff_eq!(ll, -(n as f64) / 2.0 * (2.0 * std::f64::consts::PI).ln(), epsilon = 1e-12);
    }

    #[test]
    fn inadmissible_params_are_domain_errors() {
        let order = ModelOrder::new(1, 0, 0);
        let mut params = SarimaxParams::zeros(&order, 0);
        params.phi[0] = 1.2;
        assert!(matches!(log_likelihood(&order, &params, &[1.0, 2.0, 3.0], None), Err(Error::Domain(_))));
    }

    #[test]
    fn too_short_to_fit() {
        let order = ModelOrder::new(2, 1, 2);
        assert!(matches!(
            fit(&order, &[1.0, 2.0, 3.0, 4.0, 5.0], None, &FitOptions::default()),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn pure_drift_ramp() {
        let y: Vec<f64> = (0..40).map(|i| 10.0 + 2.5 * i as f64).collect();
        let order = ModelOrder::new(0, 1, 0).drift(true);
        let m = fit(&order, &y, None, &FitOptions::default()).unwrap();
        assert_abs_diff_eq!(m.params.delta, 2.5, epsilon = 1e-6);
        assert!(m.params.sigma2 <= 1e-9, "sigma2 = {}", m.params.sigma2);
        assert_abs_diff_eq!(m.aic, 2.0 * m.n_params() as f64 - 2.0 * m.loglik, epsilon = 1e-9);
    }
}
