//! Nelder-Mead simplex minimizer.

#[derive(Debug, Clone, Copy)]
pub(crate) struct NelderMeadOptions {
    pub max_iter: usize,
    /// Stop when `f_max - f_min <= rel_tol * (|f_min| + rel_tol)`.
    pub rel_tol: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0`. Non-finite objective values are treated as +inf,
/// which lets callers reject infeasible points by returning NaN.
pub(crate) fn nelder_mead<F>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    if n == 0 {
        return Minimum { x: vec![], value: eval(x0), iterations: 0, converged: true };
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if v[i].abs() > 1.0 { opts.step * v[i].abs() } else { opts.step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();
    while iterations < opts.max_iter {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];
        let (f_lo, f_hi) = (values[best], values[worst]);
        if f_lo.is_finite() && f_hi - f_lo <= opts.rel_tol * (f_lo.abs() + opts.rel_tol) {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v / n as f64;
            }
        }
        let towards =
            |coef: f64| -> Vec<f64> { centroid.iter().zip(&simplex[worst]).map(|(c, w)| c + coef * (w - c)).collect() };

        let reflected = towards(-1.0);
        let f_r = eval(&reflected);
        if f_r < values[best] {
            let expanded = towards(-2.0);
            let f_e = eval(&expanded);
            if f_e < f_r {
                simplex[worst] = expanded;
                values[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_r;
            }
            continue;
        }
        if f_r < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_r;
            continue;
        }
        let (contracted, f_c) = if f_r < values[worst] {
            let c = towards(-0.5);
            let fc = eval(&c);
            (c, fc)
        } else {
            let c = towards(0.5);
            let fc = eval(&c);
            (c, fc)
        };
        if f_c < values[worst].min(f_r) {
            simplex[worst] = contracted;
            values[worst] = f_c;
            continue;
        }
        let anchor = simplex[best].clone();
        for &i in &order[1..] {
            simplex[i] = anchor.iter().zip(&simplex[i]).map(|(a, v)| a + 0.5 * (v - a)).collect();
            values[i] = eval(&simplex[i]);
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    Minimum { x: simplex[best].clone(), value: values[best], iterations, converged }
}
