//! Seasonal ARIMA models with exogenous regressors.
//!
//! The model for a series `y` with covariates `x` is a regression with
//! SARIMA errors:
//!
//! ```text
//! w_t = D(B) y_t,   D(B) = (1 - B)^d (1 - B^s)^D
//! w_t = delta + sum_i beta_i D(B) x_{i,t} + u_t
//! phi(B) Phi(B^s) u_t = theta(B) Theta(B^s) z_t,   z_t ~ N(0, sigma2)
//! ```
//!
//! `delta` is the mean of the differenced series, i.e. a drift term whenever
//! `d + D > 0`. Estimation is exact Gaussian maximum likelihood: a Kalman
//! filter over the expanded ARMA(p + sP, q + sQ) state space evaluates the
//! likelihood and a Nelder-Mead search maximizes it over a
//! partial-autocorrelation parameterization of the stationary and
//! invertible region.

mod auto;
mod estimate;
mod forecast;
mod kalman;
mod transform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::DifferenceSpec;

pub use auto::{
    auto_order_search, kpss_statistic, seasonal_strength, CandidateRecord, Criterion, SearchBounds, SearchLog,
};
pub use estimate::{fit, log_likelihood, regress_out_exog, ExogRegression, FitOptions};
pub use forecast::{forecast, ForecastPoint};
pub use transform::{is_invertible, is_stationary};

/// `(p,d,q)(P,D,Q)[s]` plus whether a constant term is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub seasonal_p: usize,
    pub seasonal_d: usize,
    pub seasonal_q: usize,
    pub period: usize,
    pub with_drift: bool,
}

impl ModelOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        Self { p, d, q, seasonal_p: 0, seasonal_d: 0, seasonal_q: 0, period: 1, with_drift: false }
    }

    pub fn seasonal(mut self, seasonal_p: usize, seasonal_d: usize, seasonal_q: usize, period: usize) -> Self {
        self.seasonal_p = seasonal_p;
        self.seasonal_d = seasonal_d;
        self.seasonal_q = seasonal_q;
        self.period = period;
        self
    }

    pub fn drift(mut self, with_drift: bool) -> Self {
        self.with_drift = with_drift;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::InvalidValue("seasonal period must be >= 1".into()));
        }
        if self.seasonal_p + self.seasonal_d + self.seasonal_q > 0 && self.period < 2 {
            return Err(Error::InvalidValue(format!("seasonal terms in {self} need a period >= 2")));
        }
        Ok(())
    }

    pub fn difference_spec(&self) -> DifferenceSpec {
        DifferenceSpec { d: self.d, seasonal_d: self.seasonal_d, period: self.period }
    }

    /// Number of ARMA coefficients.
    pub fn n_arma(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }

    pub fn is_seasonal(&self) -> bool {
        self.period > 1 && self.seasonal_p + self.seasonal_d + self.seasonal_q > 0
    }

    /// Human label, e.g. `ARIMA(1,0,3)x(0,1,2)_8 with drift`.
    pub fn label(&self) -> String {
        let mut s = format!("ARIMA({},{},{})", self.p, self.d, self.q);
        if self.is_seasonal() {
            s.push_str(&format!("x({},{},{})_{}", self.seasonal_p, self.seasonal_d, self.seasonal_q, self.period));
        }
        if self.with_drift {
            s.push_str(if self.d + self.seasonal_d > 0 { " with drift" } else { " with mean" });
        }
        s
    }
}

impl fmt::Display for ModelOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{})({},{},{})[{}]",
            self.p, self.d, self.q, self.seasonal_p, self.seasonal_d, self.seasonal_q, self.period
        )
    }
}

impl FromStr for ModelOrder {
    type Err = Error;

    /// Accepts `(p,d,q)(P,D,Q)[s]` or the non-seasonal `(p,d,q)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidValue(format!("model order `{s}` is not of the form (p,d,q)(P,D,Q)[s]"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let triple = |part: &str| -> Result<[usize; 3]> {
            let nums: Vec<usize> =
                part.split(',').map(|v| v.parse::<usize>().map_err(|_| bad())).collect::<Result<_>>()?;
            nums.try_into().map_err(|_| bad())
        };
        let rest = compact.strip_prefix('(').ok_or_else(bad)?;
        let (first, rest) = rest.split_once(')').ok_or_else(bad)?;
        let [p, d, q] = triple(first)?;
        let order = if rest.is_empty() {
            ModelOrder::new(p, d, q)
        } else {
            let rest = rest.strip_prefix('(').ok_or_else(bad)?;
            let (second, rest) = rest.split_once(')').ok_or_else(bad)?;
            let [sp, sd, sq] = triple(second)?;
            let period = rest
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(bad)?
                .parse::<usize>()
                .map_err(|_| bad())?;
            ModelOrder::new(p, d, q).seasonal(sp, sd, sq, period)
        };
        order.validate()?;
        Ok(order)
    }
}

/// Coefficients of a fitted or hypothesised model.
///
/// Sign conventions: `phi(B) = 1 - sum phi_i B^i` and
/// `theta(B) = 1 + sum theta_j B^j`, likewise for the seasonal polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarimaxParams {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub seasonal_phi: Vec<f64>,
    pub seasonal_theta: Vec<f64>,
    pub delta: f64,
    pub beta: Vec<f64>,
    pub sigma2: f64,
}

impl SarimaxParams {
    /// All-zero coefficients with unit variance, shaped for `order`.
    pub fn zeros(order: &ModelOrder, n_exog: usize) -> Self {
        Self {
            phi: vec![0.0; order.p],
            theta: vec![0.0; order.q],
            seasonal_phi: vec![0.0; order.seasonal_p],
            seasonal_theta: vec![0.0; order.seasonal_q],
            delta: 0.0,
            beta: vec![0.0; n_exog],
            sigma2: 1.0,
        }
    }

    pub fn check_shape(&self, order: &ModelOrder, n_exog: usize) -> Result<()> {
        let checks = [
            ("phi", self.phi.len(), order.p),
            ("theta", self.theta.len(), order.q),
            ("seasonal_phi", self.seasonal_phi.len(), order.seasonal_p),
            ("seasonal_theta", self.seasonal_theta.len(), order.seasonal_q),
            ("beta", self.beta.len(), n_exog),
        ];
        for (name, got, want) in checks {
            if got != want {
                return Err(Error::Shape(format!("{name} has {got} coefficients, order {order} needs {want}")));
            }
        }
        if !order.with_drift && self.delta != 0.0 {
            return Err(Error::Shape(format!("delta = {} but {order} has no drift term", self.delta)));
        }
        Ok(())
    }

    /// Stationarity, invertibility and positive variance.
    pub fn check_admissible(&self) -> Result<()> {
        if !is_stationary(&self.phi) {
            return Err(Error::Domain(format!("AR polynomial {:?} is not stationary", self.phi)));
        }
        if !is_stationary(&self.seasonal_phi) {
            return Err(Error::Domain(format!("seasonal AR polynomial {:?} is not stationary", self.seasonal_phi)));
        }
        if !is_invertible(&self.theta) {
            return Err(Error::Domain(format!("MA polynomial {:?} is not invertible", self.theta)));
        }
        if !is_invertible(&self.seasonal_theta) {
            return Err(Error::Domain(format!("seasonal MA polynomial {:?} is not invertible", self.seasonal_theta)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::Domain(format!("sigma2 = {} must be positive", self.sigma2)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub order: ModelOrder,
    pub params: SarimaxParams,
    pub loglik: f64,
    pub aic: f64,
    pub n_obs: usize,
    pub exog_names: Vec<String>,
    /// Exogenous columns dropped because they vanish after differencing;
    /// their coefficients are pinned at zero.
    pub pruned_exog: Vec<String>,
    pub fit_diagnostics: FitDiagnostics,
}

impl FittedModel {
    /// Estimated parameter count, including `sigma2`.
    pub fn n_params(&self) -> usize {
        self.order.n_arma() + usize::from(self.order.with_drift) + (self.exog_names.len() - self.pruned_exog.len()) + 1
    }

    pub fn bic(&self) -> f64 {
        self.n_params() as f64 * (self.n_obs as f64).ln() - 2.0 * self.loglik
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&FittedModelDocument::from(self))?)
    }
}

/// JSON layout of a fitted model, with the order in its string form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedModelDocument {
    pub order: String,
    pub with_drift: bool,
    pub params: SarimaxParams,
    pub loglik: f64,
    pub aic: f64,
    pub n_obs: usize,
    pub exog_names: Vec<String>,
    pub pruned_exog: Vec<String>,
    pub fit_diagnostics: FitDiagnostics,
}

impl From<&FittedModel> for FittedModelDocument {
    fn from(m: &FittedModel) -> Self {
        Self {
            order: m.order.to_string(),
            with_drift: m.order.with_drift,
            params: m.params.clone(),
            loglik: m.loglik,
            aic: m.aic,
            n_obs: m.n_obs,
            exog_names: m.exog_names.clone(),
            pruned_exog: m.pruned_exog.clone(),
            fit_diagnostics: m.fit_diagnostics.clone(),
        }
    }
}

impl TryFrom<FittedModelDocument> for FittedModel {
    type Error = Error;

    fn try_from(doc: FittedModelDocument) -> Result<Self> {
        let order = doc.order.parse::<ModelOrder>()?.drift(doc.with_drift);
        doc.params.check_shape(&order, doc.exog_names.len())?;
        Ok(Self {
            order,
            params: doc.params,
            loglik: doc.loglik,
            aic: doc.aic,
            n_obs: doc.n_obs,
            exog_names: doc.exog_names,
            pruned_exog: doc.pruned_exog,
            fit_diagnostics: doc.fit_diagnostics,
        })
    }
}
