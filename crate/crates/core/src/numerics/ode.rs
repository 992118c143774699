//! Dormand–Prince 5(4) integrator with the fourth-order continuous extension.
//!
//! The state dimension is a const generic so every solve stays on the stack.
//! Integration runs forward only; callers that need a stopping condition pass
//! a predicate that is checked after every accepted step.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("non-finite derivative at t = {t}")]
    NonFinite { t: f64 },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("exceeded {max_steps} steps at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },
    #[error("invalid interval [{t0}, {t1}]")]
    BadInterval { t0: f64, t1: f64 },
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Why an integration ended before (or at) the requested endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// The stop predicate fired after the step ending at this time.
    Stopped(f64),
}

#[derive(Debug, Clone)]
struct Step<const N: usize> {
    t0: f64,
    h: f64,
    coeffs: [[f64; N]; 5],
}

/// Accepted steps of one integration together with their dense output.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    steps: Vec<Step<N>>,
    t_start: f64,
    y_start: [f64; N],
    t_end: f64,
    y_end: [f64; N],
    pub termination: Termination,
    pub rhs_evaluations: usize,
}

impl<const N: usize> Trajectory<N> {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn y_end(&self) -> [f64; N] {
        self.y_end
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Mesh points (start of every step plus the final time).
    pub fn mesh(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.steps.iter().map(|s| s.t0).collect();
        m.push(self.t_end);
        m
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start && t <= self.t_end
    }

    fn locate(&self, t: f64) -> Option<&Step<N>> {
        if !self.contains(t) || self.steps.is_empty() {
            return None;
        }
        let idx = self.steps.partition_point(|s| s.t0 <= t);
        Some(&self.steps[idx.saturating_sub(1)])
    }

    /// Dense-output value at `t`, or `None` outside the integrated range.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        if self.steps.is_empty() {
            return (t == self.t_start).then_some(self.y_start);
        }
        let s = self.locate(t)?;
        let th = (t - s.t0) / s.h;
        let th1 = 1.0 - th;
        let c = &s.coeffs;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])));
        }
        Some(y)
    }

    /// Time derivative of the dense-output polynomial at `t`.
    pub fn eval_derivative(&self, t: f64) -> Option<[f64; N]> {
        let s = self.locate(t)?;
        let th = (t - s.t0) / s.h;
        let th1 = 1.0 - th;
        let c = &s.coeffs;
        let mut dy = [0.0; N];
        for i in 0..N {
            let a = c[3][i] + th1 * c[4][i];
            let da = -c[4][i];
            let b = c[2][i] + th * a;
            let db = a + th * da;
            let cc = c[1][i] + th1 * b;
            let dcc = -b + th1 * db;
            dy[i] = (cc + th * dcc) / s.h;
        }
        Some(dy)
    }

    /// Keep only the listed components.
    pub fn project<const M: usize>(&self, idx: [usize; M]) -> Trajectory<M> {
        let pick = |v: &[f64; N]| -> [f64; M] {
            let mut out = [0.0; M];
            for (o, &i) in out.iter_mut().zip(idx.iter()) {
                *o = v[i];
            }
            out
        };
        Trajectory {
            steps: self
                .steps
                .iter()
                .map(|s| Step {
                    t0: s.t0,
                    h: s.h,
                    coeffs: [
                        pick(&s.coeffs[0]),
                        pick(&s.coeffs[1]),
                        pick(&s.coeffs[2]),
                        pick(&s.coeffs[3]),
                        pick(&s.coeffs[4]),
                    ],
                })
                .collect(),
            t_start: self.t_start,
            y_start: pick(&self.y_start),
            t_end: self.t_end,
            y_end: pick(&self.y_end),
            termination: self.termination,
            rhs_evaluations: self.rhs_evaluations,
        }
    }
}

/// Adaptive embedded Runge–Kutta pair (Dormand–Prince 5(4)).
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 200_000,
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (coef, k) in terms {
        if *coef == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * coef * k[i];
        }
    }
    out
}

fn finite<const N: usize>(v: &[f64; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl Dopri5 {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn max_step(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    pub fn initial_step(mut self, h: f64) -> Self {
        self.h_init = Some(h);
        self
    }

    /// Integrate `y' = f(t, y)` from `t0` to `t1`.
    pub fn integrate<const N: usize, F>(&self, f: F, t0: f64, y0: [f64; N], t1: f64) -> Result<Trajectory<N>, OdeError>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        self.integrate_until(f, t0, y0, t1, |_, _| false)
    }

    /// Integrate until `t1` or until `stop(t, y)` returns true after an
    /// accepted step.
    pub fn integrate_until<const N: usize, F, S>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; N],
        t1: f64,
        mut stop: S,
    ) -> Result<Trajectory<N>, OdeError>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        S: FnMut(f64, &[f64; N]) -> bool,
    {
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(OdeError::BadInterval { t0, t1 });
        }
        let mut evals = 0usize;
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        evals += 1;
        if !finite(&k1) {
            return Err(OdeError::NonFinite { t });
        }
        let span = t1 - t0;
        let mut h = match self.h_init {
            Some(h) => h,
            None => self.guess_step(&y, &k1, span),
        }
        .min(self.h_max)
        .min(span);
        let mut steps: Vec<Step<N>> = Vec::new();
        let mut termination = Termination::Completed;

        while t < t1 {
            if steps.len() >= self.max_steps {
                return Err(OdeError::TooManySteps {
                    t,
                    max_steps: self.max_steps,
                });
            }
            let mut last = false;
            if t + h >= t1 || (t1 - (t + h)) < 1e-12 * span {
                h = t1 - t;
                last = true;
            }
            if h <= 1e-15 * t.abs().max(span) {
                return Err(OdeError::StepUnderflow { t, h });
            }
            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = f(t + h, &y_new);
            evals += 6;

            let stages_ok = finite(&k2)
                && finite(&k3)
                && finite(&k4)
                && finite(&k5)
                && finite(&k6)
                && finite(&k7)
                && finite(&y_new);
            let err = if stages_ok {
                let mut acc = 0.0;
                for i in 0..N {
                    let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                    let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                    acc += (e / sc) * (e / sc);
                }
                (acc / N as f64).sqrt()
            } else {
                f64::INFINITY
            };

            if err <= 1.0 {
                let mut coeffs = [[0.0; N]; 5];
                for i in 0..N {
                    let ydiff = y_new[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    coeffs[0][i] = y[i];
                    coeffs[1][i] = ydiff;
                    coeffs[2][i] = bspl;
                    coeffs[3][i] = ydiff - h * k7[i] - bspl;
                    coeffs[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                steps.push(Step { t0: t, h, coeffs });
                t = if last { t1 } else { t + h };
                y = y_new;
                k1 = k7;
                if stop(t, &y) {
                    if t < t1 {
                        termination = Termination::Stopped(t);
                    }
                    break;
                }
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (h * fac).min(self.h_max);
            } else {
                let fac = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                h *= fac;
            }
        }

        Ok(Trajectory {
            steps,
            t_start: t0,
            y_start: y0,
            t_end: t,
            y_end: y,
            termination,
            rhs_evaluations: evals,
        })
    }

    fn guess_step<const N: usize>(&self, y: &[f64; N], dy: &[f64; N], span: f64) -> f64 {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            d0 += (y[i] / sc).powi(2);
            d1 += (dy[i] / sc).powi(2);
        }
        let d0 = (d0 / N as f64).sqrt();
        let d1 = (d1 / N as f64).sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6 * span
        } else {
            0.01 * d0 / d1
        };
        h.min(0.1 * span).max(1e-12 * span)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let traj = Dopri5::default()
            .integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0)
            .unwrap();
        assert!((traj.y_end()[0] - (-5.0f64).exp()).abs() < 1e-11);
        for &t in &[0.0, 0.37, 1.5, 4.999, 5.0] {
            let y = traj.eval(t).unwrap()[0];
            assert!((y - (-t).exp()).abs() < 1e-9, "t={t} y={y}");
            let dy = traj.eval_derivative(t).unwrap()[0];
            assert!((dy + (-t).exp()).abs() < 1e-8, "t={t} dy={dy}");
        }
    }

    #[test]
    fn harmonic_oscillator_conserves_phase() {
        let traj = Dopri5::with_tolerances(1e-12, 1e-14)
            .integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], 10.0)
            .unwrap();
        let [s, c] = traj.y_end();
        assert!((s - 10f64.sin()).abs() < 1e-10);
        assert!((c - 10f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn stop_predicate_reports_time() {
        // y' = y^2, y(0) = 1 blows up at t = 1.
        let traj = Dopri5::default()
            .integrate_until(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, |_, y| y[0] > 1e6)
            .unwrap();
        match traj.termination {
            Termination::Stopped(t) => assert!((t - 1.0).abs() < 1e-5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn projection_keeps_dense_output() {
        let traj = Dopri5::default()
            .integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], 3.0)
            .unwrap();
        let p = traj.project([1]);
        assert_eq!(p.eval(1.3).unwrap()[0], traj.eval(1.3).unwrap()[1]);
    }

    #[test]
    fn rejects_reversed_interval() {
        let r = Dopri5::default().integrate(|_, y: &[f64; 1]| *y, 1.0, [1.0], 0.0);
        assert!(matches!(r, Err(OdeError::BadInterval { .. })));
    }
}
