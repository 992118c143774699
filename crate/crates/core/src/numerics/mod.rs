//! Small numerical building blocks shared by the geometry and growth code.

pub mod diff;
pub mod ode;
pub mod quad;
pub mod spline;

use nalgebra::{DMatrix, DVector};

/// Golden-section search for a maximum of `f` on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Least-squares fit result.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// 2-norm condition number of the column-scaled design matrix.
    pub condition_number: f64,
    pub residual_norm: f64,
}

/// Solve `min ||X c - y||` where `columns[j][i]` is entry `(i, j)` of `X`.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Option<LinearFit> {
    let m = y.len();
    let k = columns.len();
    if k == 0 || m < k || columns.iter().any(|c| c.len() != m) {
        return None;
    }
    let scales: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if scales.iter().any(|s| *s == 0.0 || !s.is_finite()) {
        return None;
    }
    let x = DMatrix::from_fn(m, k, |i, j| columns[j][i] / scales[j]);
    let yv = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let sol = svd.solve(&yv, 1e-14 * smax).ok()?;
    let resid = &x * &sol - &yv;
    Some(LinearFit {
        coefficients: sol.iter().zip(&scales).map(|(c, s)| c / s).collect(),
        condition_number,
        residual_norm: resid.norm(),
    })
}

/// Slope of the least-squares line through `(x, y)`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// `count` points from `start` to `stop` inclusive, evenly spaced.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// `count` points from `start` to `stop` inclusive, evenly spaced in log.
pub fn logspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    let (a, b) = (start.ln(), stop.ln());
    linspace(a, b, count)
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            if i == 0 {
                start
            } else if i == count - 1 {
                stop
            } else {
                v.exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_cosine_peak() {
        let (x, v) = golden_max(|t: f64| (t - 1.0).cos(), 0.0, 3.0, 1e-10);
        assert!((x - 1.0).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn least_squares_recovers_quadratic() {
        let t: Vec<f64> = linspace(0.01, 0.2, 8);
        let y: Vec<f64> = t.iter().map(|x| 2.0 - 0.5 * x * x).collect();
        let fit = least_squares(&[vec![1.0; 8], t.iter().map(|x| x * x).collect()], &y).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
        assert!((fit.coefficients[1] + 0.5).abs() < 1e-9);
        assert!(fit.condition_number.is_finite());
    }

    #[test]
    fn logspace_endpoints_exact() {
        let g = logspace(0.1, 10.0, 5);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[4], 10.0);
        assert!((g[2] - 1.0).abs() < 1e-15);
    }
}
