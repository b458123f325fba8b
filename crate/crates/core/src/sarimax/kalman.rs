//! Exact Gaussian likelihood of a zero-mean ARMA process by the Kalman
//! filter's prediction-error decomposition.
//!
//! State-space form with state dimension `r = max(p, q + 1)`:
//!
//! ```text
//! x[t+1] = T x[t] + R e[t]      T: companion matrix, first column = AR coefficients
//! u[t]   = x[t][0]              R = [1, theta_1, ..., theta_{r-1}]
//! ```
//!
//! The filter runs with unit innovation variance. The initial state
//! covariance is the stationary solution of `P = T P T' + R R'`, obtained by
//! the doubling iteration. Once the predicted covariance stops changing the
//! gain is frozen and each step costs O(r).

use crate::error::{Error, Result};

const STEADY_TOL: f64 = 1e-11;
const DOUBLING_MAX: usize = 100;

#[derive(Debug, Clone)]
pub(crate) struct ArmaStateSpace {
    r: usize,
    ar: Vec<f64>,
    rv: Vec<f64>,
}

/// Sums over the prediction errors `v_t` with variances `F_t` (unit-variance scale).
#[derive(Debug, Clone)]
pub(crate) struct FilterOutput {
    pub sum_log_f: f64,
    pub sum_sq: f64,
    pub n: usize,
    /// Predicted state `a_{n+1|n}` after the last observation.
    pub state: Vec<f64>,
}

impl FilterOutput {
    /// Log-likelihood at innovation variance `sigma2`.
    pub fn loglik(&self, sigma2: f64) -> f64 {
        let n = self.n as f64;
        -0.5 * n * (2.0 * std::f64::consts::PI).ln()
            - 0.5 * n * sigma2.ln()
            - 0.5 * self.sum_log_f
            - 0.5 * self.sum_sq / sigma2
    }

    /// Maximum-likelihood `sigma2`, bounded below by `floor`.
    pub fn sigma2_hat(&self, floor: f64) -> f64 {
        (self.sum_sq / self.n as f64).max(floor)
    }
}

impl ArmaStateSpace {
    /// `ar`: coefficients of `1 - sum a_i B^i`; `ma`: of `1 + sum b_j B^j`.
    pub fn new(ar: &[f64], ma: &[f64]) -> Self {
        let r = ar.len().max(ma.len() + 1);
        let mut ar_pad = vec![0.0; r];
        ar_pad[..ar.len()].copy_from_slice(ar);
        let mut rv = vec![0.0; r];
        rv[0] = 1.0;
        rv[1..=ma.len()].copy_from_slice(ma);
        Self { r, ar: ar_pad, rv }
    }

    #[cfg(test)]
    pub fn dim(&self) -> usize {
        self.r
    }

    /// `(T M)_{ij}` for a row-major `r x r` matrix.
    fn t_times(&self, m: &[f64]) -> Vec<f64> {
        let r = self.r;
        let mut out = vec![0.0; r * r];
        for i in 0..r {
            for j in 0..r {
                let below = if i + 1 < r { m[(i + 1) * r + j] } else { 0.0 };
                out[i * r + j] = self.ar[i] * m[j] + below;
            }
        }
        out
    }

    /// `T M T' + R R'`.
    fn propagate(&self, m: &[f64]) -> Vec<f64> {
        let r = self.r;
        let tm = self.t_times(m);
        let mut out = vec![0.0; r * r];
        for i in 0..r {
            for j in 0..r {
                let right = if j + 1 < r { tm[i * r + j + 1] } else { 0.0 };
                out[i * r + j] = self.ar[j] * tm[i * r] + right + self.rv[i] * self.rv[j];
            }
        }
        out
    }

    pub fn advance_state(&self, a: &[f64]) -> Vec<f64> {
        (0..self.r).map(|i| self.ar[i] * a[0] + if i + 1 < self.r { a[i + 1] } else { 0.0 }).collect()
    }

    /// Stationary state covariance (unit innovation variance).
    pub fn stationary_covariance(&self) -> Result<Vec<f64>> {
        let r = self.r;
        let mut p: Vec<f64> = (0..r * r).map(|k| self.rv[k / r] * self.rv[k % r]).collect();
        let mut a: Vec<f64> = (0..r * r)
            .map(|k| {
                let (i, j) = (k / r, k % r);
                if j == 0 {
                    self.ar[i]
                } else if j == i + 1 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        for _ in 0..DOUBLING_MAX {
            let ap = matmul(&a, &p, r);
            let incr = matmul_bt(&ap, &a, r);
            let scale = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let step = incr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (x, d) in p.iter_mut().zip(&incr) {
                *x += d;
            }
            if !step.is_finite() || !scale.is_finite() {
                return Err(Error::Domain("state covariance diverged (non-stationary AR part)".into()));
            }
            if step <= 1e-16 * scale {
                return Ok(p);
            }
            a = matmul(&a, &a, r);
        }
        Err(Error::Domain("state covariance did not converge".into()))
    }

    /// Runs the filter over `u`.
    pub fn filter(&self, u: &[f64]) -> Result<FilterOutput> {
        let r = self.r;
        let mut p = self.stationary_covariance()?;
        let mut a = vec![0.0; r];
        let mut sum_log_f = 0.0;
        let mut sum_sq = 0.0;
        let mut steady: Option<(f64, Vec<f64>)> = None;

        for &obs in u {
            let v = obs - a[0];
            if let Some((f, gain)) = &steady {
                sum_log_f += f.ln();
                sum_sq += v * v / f;
                let mut next = self.advance_state(&a);
                for (x, g) in next.iter_mut().zip(gain) {
                    *x += g * v;
                }
                a = next;
                continue;
            }

            let f = p[0];
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Domain(format!("prediction variance {f} is not positive")));
            }
            sum_log_f += f.ln();
            sum_sq += v * v / f;

            let k: Vec<f64> = (0..r).map(|i| p[i * r] / f).collect();
            let a_filt: Vec<f64> = a.iter().zip(&k).map(|(x, ki)| x + ki * v).collect();
            let mut p_filt = p.clone();
            for i in 0..r {
                for j in 0..r {
                    p_filt[i * r + j] -= p[i * r] * p[j] / f;
                }
            }
            let next_p = self.propagate(&p_filt);
            a = self.advance_state(&a_filt);

            let scale = next_p.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            let change = next_p.iter().zip(&p).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            if change <= STEADY_TOL * scale {
                // gain applied to v in a_{t+1} = T a_t + (T k) v
                let f_next = next_p[0];
                let k_next: Vec<f64> = (0..r).map(|i| next_p[i * r] / f_next).collect();
                steady = Some((f_next, self.advance_state(&k_next)));
            }
            p = next_p;
        }
        Ok(FilterOutput { sum_log_f, sum_sq, n: u.len(), state: a })
    }
}

fn matmul(a: &[f64], b: &[f64], r: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * r];
    for i in 0..r {
        for k in 0..r {
            let x = a[i * r + k];
            if x == 0.0 {
                continue;
            }
            for j in 0..r {
                out[i * r + j] += x * b[k * r + j];
            }
        }
    }
    out
}

/// `A B'`.
fn matmul_bt(a: &[f64], b: &[f64], r: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            out[i * r + j] = (0..r).map(|k| a[i * r + k] * b[j * r + k]).sum();
        }
    }
    out
}
