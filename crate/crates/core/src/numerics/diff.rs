//! Central differences with Richardson extrapolation (Ridders' tableau).

/// Estimate and error bound from the extrapolation tableau.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub error: f64,
}

const CON: f64 = 1.4;
const CON2: f64 = CON * CON;
const NTAB: usize = 10;
const SAFE: f64 = 2.0;

fn ridders<Q: FnMut(f64) -> f64>(mut quotient: Q, h0: f64) -> Derivative {
    let mut a = [[0.0f64; NTAB]; NTAB];
    let mut hh = h0;
    a[0][0] = quotient(hh);
    let mut best = Derivative {
        value: a[0][0],
        error: f64::INFINITY,
    };
    for i in 1..NTAB {
        hh /= CON;
        a[0][i] = quotient(hh);
        let mut fac = CON2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let errt = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if errt <= best.error {
                best = Derivative {
                    value: a[j][i],
                    error: errt,
                };
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= SAFE * best.error {
            break;
        }
    }
    best
}

/// First derivative of `f` at `x`, starting the tableau at step `h0`.
pub fn first<F: FnMut(f64) -> f64>(mut f: F, x: f64, h0: f64) -> Derivative {
    best_start(|h0| ridders(|h| (f(x + h) - f(x - h)) / (2.0 * h), h0), h0)
}

/// Second derivative of `f` at `x`, starting the tableau at step `h0`.
pub fn second<F: FnMut(f64) -> f64>(mut f: F, x: f64, h0: f64) -> Derivative {
    let fx = f(x);
    best_start(|h0| ridders(|h| (f(x + h) - 2.0 * fx + f(x - h)) / (h * h), h0), h0)
}

/// The tableau can stop early at an unlucky starting step; a few starts at
/// or below `h0` are tried and the smallest error estimate wins.
fn best_start<R: FnMut(f64) -> Derivative>(mut run: R, h0: f64) -> Derivative {
    [1.0, 0.6, 0.35]
        .iter()
        .map(|s| run(s * h0))
        .min_by(|a, b| a.error.total_cmp(&b.error))
        .expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_exp() {
        let d1 = first(f64::exp, 0.7, 0.1);
        let d2 = second(f64::exp, 0.7, 0.1);
        assert!((d1.value - 0.7f64.exp()).abs() < 1e-12);
        assert!((d2.value - 0.7f64.exp()).abs() < 1e-9, "{d2:?}");
    }

    #[test]
    fn second_derivative_of_log_near_pole() {
        // d2/dx2 of -ln(1 - x^2) at x = 0.98 with a step bounded by the pole.
        let f = |x: f64| -(1.0 - x * x).ln();
        let x: f64 = 0.98;
        let exact = (2.0 + 2.0 * x * x) / (1.0 - x * x).powi(2);
        let d2 = second(f, x, 0.004);
        assert!((d2.value - exact).abs() / exact < 1e-8, "{d2:?} vs {exact}");
    }
}
