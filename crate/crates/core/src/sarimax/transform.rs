//! Maps between unconstrained reals and stationary AR / invertible MA
//! coefficients through partial autocorrelations and the Durbin-Levinson
//! recursion.

use crate::series::poly_mul;

/// Partial autocorrelations are kept at most this far inside (-1, 1).
const PACF_LIMIT: f64 = 1.0 - 1e-9;

/// Durbin-Levinson step from partial autocorrelations to AR coefficients of
/// `1 - sum phi_j z^j`. Every `|r_k| < 1` yields a stationary polynomial.
pub(crate) fn pacf_to_ar(pacf: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(pacf.len());
    for (k, &r) in pacf.iter().enumerate() {
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - r * prev[k - 1 - j];
        }
        phi.push(r);
    }
    phi
}

/// Inverse of [`pacf_to_ar`]. `None` when the polynomial is not stationary
/// (some partial autocorrelation has modulus >= 1).
pub(crate) fn ar_to_pacf(phi: &[f64]) -> Option<Vec<f64>> {
    let mut cur = phi.to_vec();
    let mut pacf = vec![0.0; phi.len()];
    for k in (0..phi.len()).rev() {
        let r = cur[k];
        if !r.is_finite() || r.abs() >= 1.0 {
            return None;
        }
        pacf[k] = r;
        let denom = 1.0 - r * r;
        let prev: Vec<f64> = (0..k).map(|j| (cur[j] + r * cur[k - 1 - j]) / denom).collect();
        cur = prev;
    }
    Some(pacf)
}

/// Unconstrained values -> stationary AR coefficients.
pub(crate) fn constrain_ar(raw: &[f64]) -> Vec<f64> {
    let pacf: Vec<f64> = raw.iter().map(|u| u.tanh().clamp(-PACF_LIMIT, PACF_LIMIT)).collect();
    pacf_to_ar(&pacf)
}

/// Unconstrained values -> invertible MA coefficients of `1 + sum theta_j z^j`.
pub(crate) fn constrain_ma(raw: &[f64]) -> Vec<f64> {
    constrain_ar(raw).into_iter().map(|v| -v).collect()
}

/// Stationary AR coefficients -> unconstrained values; partial
/// autocorrelations are pulled inside `[-limit, limit]` first.
pub(crate) fn unconstrain_ar(phi: &[f64], limit: f64) -> Vec<f64> {
    match ar_to_pacf(phi) {
        Some(pacf) => pacf.iter().map(|r| r.clamp(-limit, limit).atanh()).collect(),
        None => vec![0.0; phi.len()],
    }
}

pub(crate) fn unconstrain_ma(theta: &[f64], limit: f64) -> Vec<f64> {
    let neg: Vec<f64> = theta.iter().map(|v| -v).collect();
    unconstrain_ar(&neg, limit)
}

/// True when `1 - sum phi_j z^j` has every root strictly outside the unit circle.
pub fn is_stationary(phi: &[f64]) -> bool {
    ar_to_pacf(phi).is_some()
}

/// True when `1 + sum theta_j z^j` has every root strictly outside the unit circle.
pub fn is_invertible(theta: &[f64]) -> bool {
    let neg: Vec<f64> = theta.iter().map(|v| -v).collect();
    is_stationary(&neg)
}

/// Coefficients `a` of the expanded AR operator
/// `phi(B) Phi(B^s) = 1 - sum a_i B^i`.
pub(crate) fn expand_ar(phi: &[f64], seasonal_phi: &[f64], period: usize) -> Vec<f64> {
    let lhs: Vec<f64> = std::iter::once(1.0).chain(phi.iter().map(|v| -v)).collect();
    let rhs = seasonal_poly(seasonal_phi, period, -1.0);
    let prod = poly_mul(&lhs, &rhs);
    prod[1..].iter().map(|v| -v).collect()
}

/// Coefficients `b` of `theta(B) Theta(B^s) = 1 + sum b_j B^j`.
pub(crate) fn expand_ma(theta: &[f64], seasonal_theta: &[f64], period: usize) -> Vec<f64> {
    let lhs: Vec<f64> = std::iter::once(1.0).chain(theta.iter().copied()).collect();
    let rhs = seasonal_poly(seasonal_theta, period, 1.0);
    poly_mul(&lhs, &rhs)[1..].to_vec()
}

fn seasonal_poly(coef: &[f64], period: usize, sign: f64) -> Vec<f64> {
    let mut p = vec![0.0; coef.len() * period + 1];
    p[0] = 1.0;
    for (k, c) in coef.iter().enumerate() {
        p[(k + 1) * period] = sign * c;
    }
    p
}
