use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const COLLINEAR_TOL: f64 = 1e-10;

pub(crate) struct LeastSquares {
    pub coef: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Ordinary least squares of `y` on the given columns via Householder QR.
///
/// A column whose component orthogonal to the preceding columns is
/// negligible is reported as collinear, by name.
pub(crate) fn least_squares(columns: &[Vec<f64>], names: &[String], y: &[f64]) -> Result<LeastSquares> {
    let n = y.len();
    let k = columns.len();
    if k == 0 {
        return Ok(LeastSquares { coef: vec![], residuals: y.to_vec() });
    }
    if n < k {
        return Err(Error::TooShort { needed: k, got: n });
    }
    let x = DMatrix::from_fn(n, k, |i, j| columns[j][i]);
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..k {
        let norm = columns[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || r[(j, j)].abs() <= COLLINEAR_TOL * norm {
            return Err(Error::Collinear { column: names[j].clone() });
        }
    }
    let rhs = qr.q().transpose() * DVector::from_column_slice(y);
    let coef = r.solve_upper_triangular(&rhs).ok_or_else(|| Error::Collinear { column: names[k - 1].clone() })?;
    let fitted = &x * &coef;
    let residuals = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    Ok(LeastSquares { coef: coef.iter().copied().collect(), residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|j| format!("x{j}")).collect()
    }

    #[test]
    fn exact_fit() {
        let x0 = vec![1.0; 5];
        let x1: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let y: Vec<f64> = x1.iter().map(|v| 2.0 - 0.5 * v).collect();
        let fit = least_squares(&[x0, x1], &names(2), &y).unwrap();
        assert_abs_diff_eq!(fit.coef[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.coef[1], -0.5, epsilon = 1e-12);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn collinear_column_is_named() {
        let x0 = vec![1.0; 6];
        let x1: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let x2: Vec<f64> = x1.iter().map(|v| 3.0 * v - 1.0).collect();
        let err = least_squares(&[x0, x1, x2], &names(3), &[0.0; 6]).err().unwrap();
        assert!(matches!(err, Error::Collinear { ref column } if column == "x2"));
    }
}
