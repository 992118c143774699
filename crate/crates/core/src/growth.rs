//! Maximal-modulus growth of holomorphic polynomials on model metrics and
//! the predicates built on it: three-circle convexity, monotonicity of
//! log M − d·h, order at infinity, the small-radius deficit, asymptotic
//! homogeneity and cone exponents.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::comparison::Convexifier;
use crate::error::{invalid, LabError, Result};
use crate::metric::{geodesic_trajectory, ProfileKind, RadialKahlerModel};
use crate::numerics::{golden_max, least_squares, linspace, logspace, ls_slope};
use crate::poly::HoloPoly;

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x3C1C_1E5E_ED00_0001;
/// Angular samples on a circle before golden-section refinement.
pub const CIRCLE_SAMPLES: usize = 720;
const SCREEN_SAMPLES: usize = 256;
const ASCENT_STARTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Violation,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// Sampled M_f(r) around a center, stored as log M for overflow safety.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCurve {
    pub radii: Vec<f64>,
    pub log_values: Vec<f64>,
    /// True where the sample came from a closed form rather than maximization.
    pub exact: Vec<bool>,
    pub center: Complex64,
    pub f: HoloPoly,
    pub model_name: String,
    pub r_max: f64,
    pub seed: u64,
}

impl GrowthCurve {
    pub fn values(&self) -> Vec<f64> {
        self.log_values.iter().map(|v| v.exp()).collect()
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

fn origin() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Maximum of `f` (returning a log-modulus) over the unit circle in angle.
fn circle_max<F: FnMut(f64) -> f64>(mut f: F) -> f64 {
    let n = CIRCLE_SAMPLES;
    let step = std::f64::consts::TAU / n as f64;
    let vals: Vec<f64> = (0..n).map(|k| f(k as f64 * step)).collect();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&k| vals[k] >= vals[(k + n - 1) % n] && vals[k] >= vals[(k + 1) % n])
        .collect();
    peaks.sort_by(|a, b| vals[*b].total_cmp(&vals[*a]));
    peaks.truncate(3);
    let mut best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for k in peaks {
        let c = k as f64 * step;
        let (_, v) = golden_max(&mut f, c - step, c + step, 1e-10);
        best = best.max(v);
    }
    best
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    // Box–Muller normals give a uniform direction on S^{2n-1}.
    let mut normal = || {
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen::<f64>();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(normal(), normal())).collect();
    normalize(v)
}

fn normalize(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in &mut v {
        *c /= norm;
    }
    v
}

/// Riemannian gradient ascent of |g|² on the unit sphere with Armijo steps.
fn ascend(f: &HoloPoly, u0: Vec<Complex64>, log_rho: f64, s: u32) -> (f64, Vec<Complex64>) {
    let mut u = u0;
    let (mut g, mut grad) = f.eval_scaled_grad(&u, log_rho, s);
    let mut val = g.norm_sqr();
    let mut tau = 0.5;
    for _ in 0..3000 {
        let full: Vec<Complex64> = grad.iter().map(|d| 2.0 * g * d.conj()).collect();
        let radial: f64 = full.iter().zip(&u).map(|(a, b)| (b.conj() * a).re).sum();
        let r: Vec<Complex64> = full.iter().zip(&u).map(|(a, b)| a - b * radial).collect();
        let rn = r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if rn <= 1e-10 * val || rn == 0.0 {
            break;
        }
        let mut improved = false;
        while tau > 1e-15 {
            let cand = normalize(u.iter().zip(&r).map(|(a, b)| a + b * (tau / rn)).collect());
            let (g2, grad2) = f.eval_scaled_grad(&cand, log_rho, s);
            let v2 = g2.norm_sqr();
            if v2 >= val + 1e-4 * tau * rn {
                u = cand;
                g = g2;
                grad = grad2;
                val = v2;
                tau = (2.0 * tau).min(1.0);
                improved = true;
                break;
            }
            tau *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (val.sqrt(), u)
}

/// Multi-start maximizer of |f(ρu)|/ρ^s over the unit sphere of ℂⁿ, keeping
/// its best points as warm starts for the next radius.
struct SphereMaximizer {
    rng: ChaCha8Rng,
    warm: Vec<Vec<Complex64>>,
}

impl SphereMaximizer {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            warm: Vec::new(),
        }
    }

    fn maximize(&mut self, f: &HoloPoly, log_rho: f64, s: u32) -> f64 {
        let n = f.n();
        let obj = |u: &[Complex64]| f.eval_scaled(u, log_rho, s).norm();
        let mut screen: Vec<(f64, Vec<Complex64>)> = (0..SCREEN_SAMPLES)
            .map(|_| {
                let u = random_unit(&mut self.rng, n);
                (obj(&u), u)
            })
            .collect();
        screen.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut starts: Vec<Vec<Complex64>> = self.warm.drain(..).collect();
        starts.extend(screen.into_iter().take(ASCENT_STARTS).map(|(_, u)| u));
        let mut results: Vec<(f64, Vec<Complex64>)> = starts.into_iter().map(|u| ascend(f, u, log_rho, s)).collect();
        results.sort_by(|a, b| b.0.total_cmp(&a.0));
        self.warm = results.iter().take(3).map(|(_, u)| u.clone()).collect();
        results[0].0
    }
}

fn check_center(model: &RadialKahlerModel, f: &HoloPoly, center: Complex64) -> Result<()> {
    if f.n() != model.n() {
        return Err(invalid(
            "f",
            format!("polynomial has n = {} but the model has n = {}", f.n(), model.n()),
        ));
    }
    if center != origin() && model.n() != 1 {
        return Err(invalid("center", "off-center balls are supported for n = 1 only"));
    }
    Ok(())
}

/// Off-center geodesic circles of an n = 1 model.
struct CircleFan<'a> {
    model: &'a RadialKahlerModel,
    center: Complex64,
    flat: bool,
    fan: Vec<crate::numerics::ode::Trajectory<4>>,
}

impl<'a> CircleFan<'a> {
    fn new(model: &'a RadialKahlerModel, center: Complex64, r_last: f64) -> Result<Self> {
        let rc = model.distance_from_origin(center.norm())?;
        if !(rc + r_last < model.r_max()) {
            return Err(LabError::OutOfDomain {
                what: "r",
                value: r_last,
                lo: 0.0,
                hi: model.r_max() - rc,
            });
        }
        let flat = matches!(model.profile().kind, ProfileKind::Flat);
        let fan = if flat {
            Vec::new()
        } else {
            let step = std::f64::consts::TAU / CIRCLE_SAMPLES as f64;
            (0..CIRCLE_SAMPLES)
                .map(|k| geodesic_trajectory(model, center, k as f64 * step, r_last))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(Self {
            model,
            center,
            flat,
            fan,
        })
    }

    fn point(&self, alpha: f64, r: f64, sample: Option<usize>) -> Complex64 {
        if self.flat {
            return self.center + Complex64::from_polar(r, alpha);
        }
        let y = match sample {
            Some(k) => self.fan[k].eval(r).unwrap_or(self.fan[k].y_end()),
            None => match geodesic_trajectory(self.model, self.center, alpha, r) {
                Ok(t) => t.y_end(),
                Err(_) => return Complex64::new(f64::NAN, f64::NAN),
            },
        };
        Complex64::new(y[0], y[1])
    }

    fn log_max(&self, f: &HoloPoly, r: f64) -> f64 {
        let step = std::f64::consts::TAU / CIRCLE_SAMPLES as f64;
        let logf = |z: Complex64| f.eval(&[z]).norm().ln();
        let n = CIRCLE_SAMPLES;
        let vals: Vec<f64> = (0..n).map(|k| logf(self.point(k as f64 * step, r, Some(k)))).collect();
        let mut peaks: Vec<usize> = (0..n)
            .filter(|&k| vals[k] >= vals[(k + n - 1) % n] && vals[k] >= vals[(k + 1) % n])
            .collect();
        peaks.sort_by(|a, b| vals[*b].total_cmp(&vals[*a]));
        peaks.truncate(3);
        let mut best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for k in peaks {
            let c = k as f64 * step;
            let (_, v) = golden_max(|a| logf(self.point(a, r, None)), c - step, c + step, 1e-10);
            if v.is_finite() {
                best = best.max(v);
            }
        }
        best
    }
}

/// Closed form of log max |c z^α| over the Euclidean ball of radius e^{log ρ}.
fn monomial_log_max(exps: &[u32], c: Complex64, log_rho: f64) -> f64 {
    let total: u32 = exps.iter().sum();
    let mut v = c.norm().ln() + total as f64 * log_rho;
    for &a in exps.iter().filter(|&&a| a > 0) {
        v += 0.5 * a as f64 * (a as f64 / total as f64).ln();
    }
    v
}

fn origin_log_max(
    model: &RadialKahlerModel,
    f: &HoloPoly,
    r: f64,
    maximizer: &mut SphereMaximizer,
) -> Result<(f64, bool)> {
    if !(r > 0.0) {
        return Err(invalid("r", "radius must be positive"));
    }
    let log_rho = model.log_rho_of_r(r)?;
    if let Some((e, c)) = f.single_monomial() {
        return Ok((monomial_log_max(e, c, log_rho), true));
    }
    let s = if log_rho >= 0.0 {
        f.degree()
    } else {
        f.vanishing_order()
    };
    let m = if f.n() == 1 {
        circle_max(|t| f.eval_scaled(&[Complex64::from_polar(1.0, t)], log_rho, s).norm().ln())
    } else {
        maximizer.maximize(f, log_rho, s).ln()
    };
    Ok((s as f64 * log_rho + m, false))
}

/// log M_f(r) for the geodesic ball of radius r around `center`.
pub fn log_max_modulus(model: &RadialKahlerModel, f: &HoloPoly, center: Complex64, r: f64) -> Result<f64> {
    check_center(model, f, center)?;
    let value = if center == origin() {
        origin_log_max(model, f, r, &mut SphereMaximizer::new(DEFAULT_SEED))?.0
    } else {
        CircleFan::new(model, center, r)?.log_max(f, r)
    };
    if !value.is_finite() {
        return Err(LabError::MaximizationFailed(format!("log M_f({r}) = {value}")));
    }
    Ok(value)
}

/// M_f(r) = max |f| over the geodesic ball B(center, r).
pub fn max_modulus(model: &RadialKahlerModel, f: &HoloPoly, center: Complex64, r: f64) -> Result<f64> {
    Ok(log_max_modulus(model, f, center, r)?.exp())
}

pub fn growth_curve(model: &RadialKahlerModel, f: &HoloPoly, center: Complex64, radii: &[f64]) -> Result<GrowthCurve> {
    growth_curve_seeded(model, f, center, radii, DEFAULT_SEED)
}

/// Growth curve on sorted radii; `seed` drives the random starts of the
/// sphere maximization for n ≥ 2.
pub fn growth_curve_seeded(
    model: &RadialKahlerModel,
    f: &HoloPoly,
    center: Complex64,
    radii: &[f64],
    seed: u64,
) -> Result<GrowthCurve> {
    check_center(model, f, center)?;
    if radii.is_empty() {
        return Err(LabError::TooFewSamples("no radii".into()));
    }
    if radii[0] <= 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("radii", "must be positive and strictly increasing"));
    }
    let mut log_values = Vec::with_capacity(radii.len());
    let mut exact = Vec::with_capacity(radii.len());
    if center == origin() {
        let mut maximizer = SphereMaximizer::new(seed);
        for &r in radii {
            let (v, e) = origin_log_max(model, f, r, &mut maximizer)?;
            log_values.push(v);
            exact.push(e);
        }
    } else {
        let fan = CircleFan::new(model, center, *radii.last().unwrap())?;
        for &r in radii {
            log_values.push(fan.log_max(f, r));
            exact.push(false);
        }
    }
    if let Some(i) = log_values.iter().position(|v| !v.is_finite()) {
        return Err(LabError::NonPositiveModulus { r: radii[i] });
    }
    Ok(GrowthCurve {
        radii: radii.to_vec(),
        log_values,
        exact,
        center,
        f: f.clone(),
        model_name: model.name().to_string(),
        r_max: model.r_max(),
        seed,
    })
}

/// Discrete convexity of log M against h.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub radii: Vec<f64>,
    pub h_values: Vec<f64>,
    pub log_m: Vec<f64>,
    /// slope(r_{i}, r_{i+1}) − slope(r_{i−1}, r_i) for interior samples.
    pub second_differences: Vec<Option<f64>>,
    pub min_second_difference: f64,
    /// Middle radius of the worst triple.
    pub argmin: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

fn h_on_radii(curve: &GrowthCurve, h: &Convexifier) -> Result<Vec<f64>> {
    let hv = curve.radii.iter().map(|&r| h.value(r)).collect::<Result<Vec<f64>>>()?;
    for (i, w) in hv.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(LabError::NotIncreasing { r: curve.radii[i + 1] });
        }
    }
    Ok(hv)
}

fn check_log_values(curve: &GrowthCurve) -> Result<()> {
    if let Some(i) = curve.log_values.iter().position(|v| !v.is_finite()) {
        return Err(LabError::NonPositiveModulus { r: curve.radii[i] });
    }
    Ok(())
}

/// Divided-difference convexity of log M_f against h. A triple passes when
/// its slope increase is ≥ −tol·(1 + max |log M| over the triple).
pub fn three_circle_check(curve: &GrowthCurve, h: &Convexifier, tol: f64) -> Result<ConvexityReport> {
    if curve.len() < 3 {
        return Err(LabError::TooFewSamples(
            "three-circle check needs at least 3 radii".into(),
        ));
    }
    check_log_values(curve)?;
    let hv = h_on_radii(curve, h)?;
    let lm = &curve.log_values;
    let m = curve.len();
    let mut second = vec![None; m];
    let mut min_sd = f64::INFINITY;
    let mut argmin = curve.radii[1];
    let mut verdict = Verdict::Pass;
    for i in 1..m - 1 {
        let s1 = (lm[i] - lm[i - 1]) / (hv[i] - hv[i - 1]);
        let s2 = (lm[i + 1] - lm[i]) / (hv[i + 1] - hv[i]);
        let sd = s2 - s1;
        second[i] = Some(sd);
        if sd < min_sd {
            min_sd = sd;
            argmin = curve.radii[i];
        }
        let scale = 1.0 + lm[i - 1].abs().max(lm[i].abs()).max(lm[i + 1].abs());
        if sd < -tol * scale {
            verdict = Verdict::Violation;
        }
    }
    Ok(ConvexityReport {
        radii: curve.radii.clone(),
        h_values: hv,
        log_m: lm.clone(),
        second_differences: second,
        min_second_difference: min_sd,
        argmin,
        tolerance: tol,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Nonincreasing,
    Nondecreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub d: f64,
    pub direction: Direction,
    /// log M − d·h at each radius.
    pub quantity: Vec<f64>,
    /// Largest step against the required direction (negative when none).
    pub worst_step: f64,
    pub worst_at: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Sign of consecutive differences of log M_f − d·h.
pub fn monotonicity_check(
    curve: &GrowthCurve,
    h: &Convexifier,
    d: f64,
    direction: Direction,
    tol: f64,
) -> Result<MonotonicityReport> {
    if !(d >= 0.0) {
        return Err(invalid("d", "must be nonnegative"));
    }
    if curve.len() < 2 {
        return Err(LabError::TooFewSamples("monotonicity needs at least 2 radii".into()));
    }
    check_log_values(curve)?;
    let hv = h_on_radii(curve, h)?;
    let q: Vec<f64> = curve.log_values.iter().zip(&hv).map(|(l, h)| l - d * h).collect();
    let sign = match direction {
        Direction::Nonincreasing => 1.0,
        Direction::Nondecreasing => -1.0,
    };
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = curve.radii[1];
    let mut verdict = Verdict::Pass;
    for i in 1..q.len() {
        let step = sign * (q[i] - q[i - 1]);
        if step > worst {
            worst = step;
            worst_at = curve.radii[i];
        }
        if step > tol * (1.0 + curve.log_values[i].abs()) {
            verdict = Verdict::Violation;
        }
    }
    Ok(MonotonicityReport {
        d,
        direction,
        quantity: q,
        worst_step: worst,
        worst_at,
        tolerance: tol,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Order {
    Finite(f64),
    Infinite,
}

/// Slope of log M against log r over the outermost decade of the curve,
/// or `Infinite` when that slope exceeds the previous decade's by > 10%.
pub fn order_at_infinity(curve: &GrowthCurve) -> Result<Order> {
    if curve.r_max.is_finite() {
        return Err(LabError::CompactModel(curve.model_name.clone()));
    }
    check_log_values(curve)?;
    let r_last = *curve.radii.last().unwrap();
    if r_last < 100.0 {
        return Err(LabError::TooFewSamples(format!(
            "order at infinity needs radii reaching 100, last is {r_last}"
        )));
    }
    let window = |lo: f64, hi: f64| -> (Vec<f64>, Vec<f64>) {
        curve
            .radii
            .iter()
            .zip(&curve.log_values)
            .filter(|(r, _)| **r >= lo * (1.0 - 1e-12) && **r <= hi * (1.0 + 1e-12))
            .map(|(r, l)| (r.ln(), *l))
            .unzip()
    };
    let (x, y) = window(r_last / 10.0, r_last);
    if x.len() < 10 {
        return Err(LabError::TooFewSamples(format!(
            "outermost decade holds {} samples, need 10",
            x.len()
        )));
    }
    let slope = ls_slope(&x, &y);
    let (xp, yp) = window(r_last / 100.0, r_last / 10.0);
    if xp.len() >= 3 {
        let prev = ls_slope(&xp, &yp);
        if slope > 1.1 * prev && slope - prev > 1e-9 {
            return Ok(Order::Infinite);
        }
    }
    Ok(Order::Finite(slope.max(0.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficitReport {
    pub model: String,
    /// Fitted coefficient in M/(c r) = 1 + c₂ r² + O(r⁴).
    pub c2: f64,
    /// Fitted limit of M/r at the origin.
    pub c: f64,
    /// K(0)/12 from the model curvature at the origin.
    pub prediction: f64,
    pub condition_number: f64,
    pub radii: Vec<f64>,
}

/// Default grid of 8 radii in (0, 0.2·min(1, r_max)).
pub fn deficit_grid(model: &RadialKahlerModel) -> Vec<f64> {
    let hi = 0.2 * model.r_max().min(1.0) * 0.999;
    linspace(hi / 8.0, hi, 8)
}

/// Fit c₂ in M_{z₁}(r)/(c r) = 1 + c₂ r² + c₄ r⁴ on small radii.
pub fn necessity_deficit(model: &RadialKahlerModel, radii: &[f64]) -> Result<DeficitReport> {
    let lim = 0.2 * model.r_max().min(1.0);
    if radii.len() < 6 {
        return Err(LabError::TooFewSamples("deficit fit needs at least 6 radii".into()));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r < lim)) {
        return Err(invalid("radii", format!("must lie in (0, {lim})")));
    }
    let mut e = vec![0; model.n()];
    e[0] = 1;
    let f = HoloPoly::monomial(e, Complex64::new(1.0, 0.0))?;
    let y = radii
        .iter()
        .map(|&r| Ok(log_max_modulus(model, &f, origin(), r)?.exp() / r))
        .collect::<Result<Vec<f64>>>()?;
    let cols = vec![
        vec![1.0; radii.len()],
        radii.iter().map(|r| r * r).collect(),
        radii.iter().map(|r| r.powi(4)).collect(),
    ];
    let fit = least_squares(&cols, &y).ok_or_else(|| LabError::UnstableFit("singular design".into()))?;
    if !(fit.condition_number < 1e12) {
        return Err(LabError::UnstableFit(format!(
            "condition number {:e}",
            fit.condition_number
        )));
    }
    let c = fit.coefficients[0];
    Ok(DeficitReport {
        model: model.name().to_string(),
        c2: fit.coefficients[1] / c,
        c,
        prediction: model.radial_curvature(0.0)? / 12.0,
        condition_number: fit.condition_number,
        radii: radii.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityReport {
    pub r: f64,
    pub k: f64,
    pub d: f64,
    pub value: f64,
    pub rays: usize,
    pub seed: u64,
}

/// sup |f(y) r(x)^d − f(x) r(y)^d| / (M_f(r) r^d) over x with r ≤ r(x) ≤ K r
/// on sampled rays and y on the segment from the origin to x.
///
/// `d` defaults to the numerical order at infinity of f.
pub fn homogeneity_check(
    model: &RadialKahlerModel,
    f: &HoloPoly,
    k: f64,
    r: f64,
    ray_samples: usize,
    d: Option<f64>,
    seed: u64,
) -> Result<HomogeneityReport> {
    check_center(model, f, origin())?;
    if model.is_bounded() {
        return Err(LabError::CompactModel(model.name().to_string()));
    }
    if !(k > 1.0) || !(r > 0.0) || ray_samples == 0 {
        return Err(invalid("homogeneity", "need K > 1, r > 0 and at least one ray"));
    }
    let d = match d {
        Some(d) => d,
        None => {
            let base = r.max(100.0);
            let curve = growth_curve_seeded(model, f, origin(), &logspace(base, 100.0 * base, 21), seed)?;
            match order_at_infinity(&curve)? {
                Order::Finite(d) => d,
                Order::Infinite => return Err(LabError::BadOrder("infinite".into())),
            }
        }
    };
    if !(d > 1e-9) || !d.is_finite() {
        return Err(LabError::BadOrder(format!("{d}")));
    }
    let log_m = log_max_modulus(model, f, origin(), r)?;
    let n = f.n();
    let rays: Vec<Vec<Complex64>> = if n == 1 {
        (0..ray_samples)
            .map(|j| {
                vec![Complex64::from_polar(
                    1.0,
                    std::f64::consts::TAU * j as f64 / ray_samples as f64,
                )]
            })
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..ray_samples).map(|_| random_unit(&mut rng, n)).collect()
    };
    let levels = linspace(r, k * r, 16);
    let ts = linspace(0.0, 1.0, 33);
    let mut sup: f64 = 0.0;
    for dir in &rays {
        for &s in &levels {
            let rho_x = model.rho_of_r(s)?;
            let x: Vec<Complex64> = dir.iter().map(|c| c * rho_x).collect();
            let fx = f.eval(&x);
            for &t in &ts {
                let y: Vec<Complex64> = x.iter().map(|c| c * t).collect();
                let ry = model.distance_from_origin(rho_x * t)?;
                let fy = f.eval(&y);
                // Both terms divided by M_f(r)·r^d before subtracting.
                let a = fy * ((s / r).ln() * d - log_m).exp();
                let b = if ry > 0.0 {
                    fx * ((ry / r).ln() * d - log_m).exp()
                } else {
                    Complex64::new(0.0, 0.0)
                };
                sup = sup.max((a - b).norm());
            }
        }
    }
    Ok(HomogeneityReport {
        r,
        k,
        d,
        value: sup,
        rays: ray_samples,
        seed,
    })
}

/// Nonnegative root α of λ = α(m + α − 2): the growth exponent of a
/// harmonic function on a cone whose link has eigenvalue λ.
pub fn cone_exponent(lambda: f64, m: u32) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(invalid("lambda", "must be nonnegative"));
    }
    if m < 2 {
        return Err(invalid("m", "cone dimension must be at least 2"));
    }
    let b = m as f64 - 2.0;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    // Rationalized root avoids cancellation for small λ.
    Ok(2.0 * lambda / (b + (b * b + 4.0 * lambda).sqrt()))
}

/// λ = α(m + α − 2).
pub fn separation_eigenvalue(alpha: f64, m: u32) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(invalid("alpha", "must be nonnegative"));
    }
    if m < 2 {
        return Err(invalid("m", "cone dimension must be at least 2"));
    }
    Ok(alpha * (m as f64 + alpha - 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str, n: usize) -> HoloPoly {
        HoloPoly::parse(s, Some(n)).unwrap()
    }

    #[test]
    fn monomial_closed_forms() {
        let flat1 = RadialKahlerModel::flat(1);
        assert!((max_modulus(&flat1, &poly("z^3", 1), origin(), 2.0).unwrap() - 8.0).abs() < 1e-12);
        let flat2 = RadialKahlerModel::flat(2);
        assert!((max_modulus(&flat2, &poly("z1 z2", 2), origin(), 1.0).unwrap() - 0.5).abs() < 1e-15);
        let cigar = RadialKahlerModel::cigar(1);
        assert!((max_modulus(&cigar, &poly("z", 1), origin(), 2.0).unwrap() - 2f64.sinh()).abs() < 1e-12);
    }

    #[test]
    fn numeric_max_agrees_with_triangle_equality() {
        let flat = RadialKahlerModel::flat(1);
        let f = poly("z^2 + 10z", 1);
        for r in [0.5, 3.0, 20.0] {
            let m = max_modulus(&flat, &f, origin(), r).unwrap();
            assert!((m / (r * r + 10.0 * r) - 1.0).abs() < 1e-9, "r={r}");
        }
    }

    #[test]
    fn sphere_maximizer_matches_monomial_value() {
        // |z1 z2| + small perturbation: compare the numeric path on z1 z2 itself.
        let flat = RadialKahlerModel::flat(2);
        let f = HoloPoly::new(
            2,
            [
                (vec![1, 1], Complex64::new(1.0, 0.0)),
                (vec![0, 0], Complex64::new(1e-300, 0.0)),
            ],
        )
        .unwrap();
        let m = max_modulus(&flat, &f, origin(), 1.0).unwrap();
        assert!((m - 0.5).abs() < 1e-7, "{m}");
    }

    #[test]
    fn off_center_flat_disk() {
        let flat = RadialKahlerModel::flat(1);
        let f = poly("z", 1);
        let c = Complex64::new(1.0, 1.0);
        let m = max_modulus(&flat, &f, c, 0.5).unwrap();
        assert!((m - (2f64.sqrt() + 0.5)).abs() < 1e-9);
    }

    #[test]
    fn convexity_examples() {
        let hyp = RadialKahlerModel::hyperbolic(1.0, 1).unwrap();
        let curve = growth_curve(&hyp, &poly("z", 1), origin(), &[0.5, 1.0, 1.5]).unwrap();
        let rep = three_circle_check(&curve, &Convexifier::log(), 1e-6).unwrap();
        assert_eq!(rep.verdict, Verdict::Violation);
        assert!(
            (rep.min_second_difference + 0.1316).abs() < 1e-3,
            "{}",
            rep.min_second_difference
        );
        let rep = three_circle_check(&curve, &Convexifier::log_tanh(1.0), 1e-6).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn monotonicity_examples() {
        let flat = RadialKahlerModel::flat(1);
        let curve = growth_curve(&flat, &poly("z^2 + 10z", 1), origin(), &logspace(0.5, 50.0, 20)).unwrap();
        let rep = monotonicity_check(&curve, &Convexifier::log(), 2.0, Direction::Nonincreasing, 1e-7).unwrap();
        assert!(rep.verdict.passed());
        let rep = monotonicity_check(&curve, &Convexifier::log(), 1.0, Direction::Nondecreasing, 1e-7).unwrap();
        assert!(rep.verdict.passed());
        let rep = monotonicity_check(&curve, &Convexifier::log(), 1.0, Direction::Nonincreasing, 1e-7).unwrap();
        assert!(!rep.verdict.passed());
    }

    #[test]
    fn order_examples() {
        let flat = RadialKahlerModel::flat(1);
        let radii = logspace(10.0, 1e3, 21);
        let c = growth_curve(&flat, &poly("z^3", 1), origin(), &radii).unwrap();
        assert_eq!(order_at_infinity(&c).unwrap(), Order::Finite(3.0));
        let cigar = RadialKahlerModel::cigar(1);
        let c = growth_curve(&cigar, &poly("z", 1), origin(), &radii).unwrap();
        assert_eq!(order_at_infinity(&c).unwrap(), Order::Infinite);
        let sphere = RadialKahlerModel::sphere(1.0, 1).unwrap();
        let c = growth_curve(&sphere, &poly("z", 1), origin(), &[0.5, 1.0, 2.0]).unwrap();
        assert!(matches!(order_at_infinity(&c), Err(LabError::CompactModel(_))));
    }

    #[test]
    fn cone_round_trip() {
        assert_eq!(separation_eigenvalue(1.0, 2).unwrap(), 1.0);
        assert_eq!(separation_eigenvalue(1.0, 4).unwrap(), 3.0);
        assert!((cone_exponent(3.0, 4).unwrap() - 1.0).abs() < 1e-15);
        assert!(cone_exponent(-1.0, 4).is_err());
    }
}
