//! Comparison ODEs: Riccati supersolutions u with u' + 2u² + g/2 ≥ 0 and
//! 2ur → 1 at the origin, and convexifiers h with ½h'' + h'u = 0 and
//! e^h/r → 1.
//!
//! Numeric solutions are integrated in the regular variable
//! v = (2ur − 1)/r², together with I = ∫₀ʳ t v dt and
//! K = ∫₀ʳ (e^{−I} − 1)/t dt, so that h = log r + K and h' = e^{−I}/r.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use crate::error::{invalid, LabError, Result};
use crate::metric::{ProfileKind, RadialKahlerModel};
use crate::numerics::ode::{Dopri5, Termination, Trajectory};
use crate::numerics::{diff, logspace, ls_slope, quad};

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radius where numeric integration starts.
pub const R_START: f64 = 1e-6;
/// Radius where origin normalizations are checked.
pub const R_NORMALIZE: f64 = 1e-4;
/// Default pass tolerance for Riccati residuals.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// |w| = |2ur| beyond which the solution is declared blown down.
const BLOW_DOWN_W: f64 = 1e6;

/// Lower bound g(r) for the holomorphic sectional curvature of radial planes.
#[derive(Clone)]
pub enum CurvatureBound {
    Constant(f64),
    /// g = −A/(1+r)^{2+ε}.
    PowerDecay {
        a: f64,
        eps: f64,
    },
    /// g = C/r² for r ≥ r₀, held at C/r₀² inside r₀.
    InverseSquare {
        c: f64,
        r0: f64,
    },
    /// g = 2/cosh²r.
    Cigar,
    Custom {
        name: String,
        g: RadialFn,
    },
}

impl fmt::Debug for CurvatureBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl CurvatureBound {
    pub fn power_decay(a: f64, eps: f64) -> Result<Self> {
        if !(a > 0.0) || !(eps > 0.0) {
            return Err(invalid("power_decay", "need A > 0 and eps > 0"));
        }
        Ok(Self::PowerDecay { a, eps })
    }

    pub fn inverse_square(c: f64, r0: f64) -> Result<Self> {
        if !(c > 0.0 && c < 0.25) {
            return Err(invalid("C", "inverse-square bound needs 0 < C < 1/4"));
        }
        if !(r0 > 0.0) {
            return Err(invalid("r0", "must be positive"));
        }
        Ok(Self::InverseSquare { c, r0 })
    }

    pub fn custom(name: &str, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom {
            name: name.into(),
            g: Arc::new(g),
        }
    }

    /// The model's own radial curvature as a bound (the equality case).
    pub fn from_model(model: &RadialKahlerModel) -> Self {
        let m = model.clone();
        Self::custom(&format!("curvature({})", model.name()), move |r| {
            m.radial_curvature(r).unwrap_or(f64::NAN)
        })
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::PowerDecay { a, eps } => -a * (1.0 + r).powf(-2.0 - eps),
            Self::InverseSquare { c, r0 } => c / r.max(*r0).powi(2),
            Self::Cigar => 2.0 / r.cosh().powi(2),
            Self::Custom { g, .. } => g(r),
        }
    }

    pub fn tag(&self) -> String {
        match self {
            Self::Constant(c) => format!("constant({c})"),
            Self::PowerDecay { a, eps } => format!("power_decay(A={a}, eps={eps})"),
            Self::InverseSquare { c, r0 } => format!("inverse_square(C={c}, r0={r0})"),
            Self::Cigar => "cigar".into(),
            Self::Custom { name, .. } => name.clone(),
        }
    }
}

/// Numeric solution of the Riccati equality, columns `[v, I, K]`.
#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    traj: Trajectory<3>,
    blow_down: Option<f64>,
    bound: String,
}

impl RiccatiSolution {
    pub fn blow_down(&self) -> Option<f64> {
        self.blow_down
    }

    pub fn r_end(&self) -> f64 {
        self.traj.t_end()
    }

    pub fn bound(&self) -> &str {
        &self.bound
    }

    fn state(&self, r: f64) -> Result<([f64; 3], [f64; 3])> {
        match (self.traj.eval(r), self.traj.eval_derivative(r)) {
            (Some(y), Some(dy)) => Ok((y, dy)),
            _ => match self.blow_down {
                Some(radius) if r >= radius => Err(LabError::BlowDown { radius }),
                _ => Err(LabError::OutOfDomain {
                    what: "r",
                    value: r,
                    lo: self.traj.t_start(),
                    hi: self.traj.t_end(),
                }),
            },
        }
    }
}

#[derive(Clone)]
pub enum SuperKind {
    /// 1/(2r).
    Flat,
    /// √κ coth(√κ r)/2, the equality case for g ≡ −κ.
    Hyperbolic {
        kappa: f64,
    },
    /// √κ cot(√κ r)/2, the equality case for g ≡ κ.
    Spherical {
        kappa: f64,
    },
    /// 1/sinh(2r).
    Cigar,
    /// 1/(2r) + A/(1+r)^{1+ε}.
    PowerDecay {
        a: f64,
        eps: f64,
    },
    /// G(r)/r with G = (aX − b)/(X − 1), X = B r^k; exact for g = C/r².
    InverseSquareClaim {
        a: f64,
        b: f64,
        k: f64,
        big_b: f64,
    },
    Numeric(Arc<RiccatiSolution>),
    Custom {
        name: String,
        u: RadialFn,
    },
}

/// A candidate u for the Riccati inequality, with its domain of definition.
#[derive(Clone)]
pub struct Supersolution {
    pub kind: SuperKind,
    pub origin_normalized: bool,
    domain: (f64, f64),
}

impl fmt::Debug for Supersolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Supersolution")
            .field("tag", &self.tag())
            .field("origin_normalized", &self.origin_normalized)
            .field("domain", &self.domain)
            .finish()
    }
}

impl Supersolution {
    pub fn flat() -> Self {
        Self::closed(SuperKind::Flat, f64::INFINITY)
    }

    pub fn hyperbolic(kappa: f64) -> Self {
        Self::closed(SuperKind::Hyperbolic { kappa }, f64::INFINITY)
    }

    pub fn spherical(kappa: f64) -> Self {
        Self::closed(SuperKind::Spherical { kappa }, std::f64::consts::PI / kappa.sqrt())
    }

    pub fn cigar() -> Self {
        Self::closed(SuperKind::Cigar, f64::INFINITY)
    }

    pub fn power_decay(a: f64, eps: f64) -> Self {
        Self::closed(SuperKind::PowerDecay { a, eps }, f64::INFINITY)
    }

    /// Exact solution family for g = C/r² built from the roots of 2x² − x + C/2.
    pub fn inverse_square_claim(c: f64, big_b: f64) -> Result<Self> {
        let roots = crate::dimension::exp_growth_roots(c)?;
        if !(big_b > 0.0) {
            return Err(invalid("B", "must be positive"));
        }
        let k = roots.k;
        Ok(Self {
            kind: SuperKind::InverseSquareClaim {
                a: roots.a,
                b: roots.b,
                k,
                big_b,
            },
            origin_normalized: false,
            domain: (big_b.powf(-1.0 / k), f64::INFINITY),
        })
    }

    pub fn custom(
        name: &str,
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain: (f64, f64),
        origin_normalized: bool,
    ) -> Self {
        Self {
            kind: SuperKind::Custom {
                name: name.into(),
                u: Arc::new(u),
            },
            origin_normalized,
            domain,
        }
    }

    fn closed(kind: SuperKind, end: f64) -> Self {
        Self {
            kind,
            origin_normalized: true,
            domain: (0.0, end),
        }
    }

    /// Open interval where u is defined.
    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn numeric(&self) -> Option<&RiccatiSolution> {
        match &self.kind {
            SuperKind::Numeric(s) => Some(s),
            _ => None,
        }
    }

    pub fn tag(&self) -> String {
        match &self.kind {
            SuperKind::Flat => "flat".into(),
            SuperKind::Hyperbolic { kappa } => format!("hyperbolic(kappa={kappa})"),
            SuperKind::Spherical { kappa } => format!("spherical(kappa={kappa})"),
            SuperKind::Cigar => "cigar".into(),
            SuperKind::PowerDecay { a, eps } => format!("power_decay(A={a}, eps={eps})"),
            SuperKind::InverseSquareClaim { a, b, k, big_b } => {
                format!("inverse_square_claim(a={a}, b={b}, k={k}, B={big_b})")
            }
            SuperKind::Numeric(s) => format!("riccati({})", s.bound),
            SuperKind::Custom { name, .. } => name.clone(),
        }
    }

    fn check(&self, r: f64) -> Result<()> {
        if let SuperKind::Numeric(s) = &self.kind {
            if let Some(radius) = s.blow_down {
                if r >= radius {
                    return Err(LabError::BlowDown { radius });
                }
            }
        }
        if !(r > self.domain.0 && r < self.domain.1) {
            return Err(LabError::OutOfDomain {
                what: "r",
                value: r,
                lo: self.domain.0,
                hi: self.domain.1,
            });
        }
        Ok(())
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(match &self.kind {
            SuperKind::Flat => 0.5 / r,
            SuperKind::Hyperbolic { kappa } => {
                let s = kappa.sqrt();
                0.5 * s / (s * r).tanh()
            }
            SuperKind::Spherical { kappa } => {
                let s = kappa.sqrt();
                0.5 * s / (s * r).tan()
            }
            SuperKind::Cigar => 1.0 / (2.0 * r).sinh(),
            SuperKind::PowerDecay { a, eps } => 0.5 / r + a * (1.0 + r).powf(-1.0 - eps),
            SuperKind::InverseSquareClaim { a, b, k, big_b } => {
                let x = big_b * r.powf(*k);
                (a * x - b) / (x - 1.0) / r
            }
            SuperKind::Numeric(s) => {
                let (y, _) = s.state(r)?;
                0.5 / r + 0.5 * r * y[0]
            }
            SuperKind::Custom { u, .. } => u(r),
        })
    }

    /// u'(r): analytic for closed forms, Richardson differences for custom u.
    pub fn derivative(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(match &self.kind {
            SuperKind::Flat => -0.5 / (r * r),
            SuperKind::Hyperbolic { kappa } => -0.5 * kappa / (kappa.sqrt() * r).sinh().powi(2),
            SuperKind::Spherical { kappa } => -0.5 * kappa / (kappa.sqrt() * r).sin().powi(2),
            SuperKind::Cigar => {
                let s = (2.0 * r).sinh();
                -2.0 * (2.0 * r).cosh() / (s * s)
            }
            SuperKind::PowerDecay { a, eps } => -0.5 / (r * r) - a * (1.0 + eps) * (1.0 + r).powf(-2.0 - eps),
            SuperKind::InverseSquareClaim { a, b, k, big_b } => {
                let x = big_b * r.powf(*k);
                let g = (a * x - b) / (x - 1.0);
                let gp = -k * x * (a - b) / (r * (x - 1.0).powi(2));
                gp / r - g / (r * r)
            }
            SuperKind::Numeric(s) => {
                let (y, dy) = s.state(r)?;
                -0.5 / (r * r) + 0.5 * y[0] + 0.5 * r * dy[0]
            }
            SuperKind::Custom { u, .. } => {
                let room = (r - self.domain.0).min(self.domain.1 - r);
                let h0 = (0.1 * r).min(0.5 * room);
                let d = diff::first(|x| u(x), r, h0);
                if !(d.error <= 1e-7 * d.value.abs().max(1.0)) {
                    return Err(LabError::RefinementFailure { rho: r, error: d.error });
                }
                d.value
            }
        })
    }

    /// u' + 2u² + g/2 at r.
    pub fn residual(&self, g: &CurvatureBound, r: f64) -> Result<f64> {
        let gr = g.eval(r);
        if let SuperKind::Numeric(s) = &self.kind {
            self.check(r)?;
            // In terms of v this is (3v + r v' + r²v² + g)/2, free of 1/r² cancellation.
            let (y, dy) = s.state(r)?;
            let v = y[0];
            return Ok(0.5 * (3.0 * v + r * dy[0] + r * r * v * v + gr));
        }
        let u = self.value(r)?;
        Ok(self.derivative(r)? + 2.0 * u * u + 0.5 * gr)
    }

    /// |2u(r₀)r₀ − 1| at r₀ = 1e−4.
    pub fn normalization_residual(&self) -> Result<f64> {
        Ok((2.0 * self.value(R_NORMALIZE)? * R_NORMALIZE - 1.0).abs())
    }

    /// 2u − 1/r, computed without cancellation where a closed form allows.
    fn excess(&self, r: f64) -> Result<f64> {
        Ok(match &self.kind {
            SuperKind::Flat => 0.0,
            SuperKind::PowerDecay { a, eps } => 2.0 * a * (1.0 + r).powf(-1.0 - eps),
            SuperKind::Numeric(s) => r * s.state(r)?.0[0],
            _ => 2.0 * self.value(r)? - 1.0 / r,
        })
    }
}

/// Result of checking the Riccati inequality on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub supersolution: String,
    pub bound: String,
    pub min_residual: f64,
    pub argmin: f64,
    pub max_abs_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Evaluate u' + 2u² + g/2 on `grid`; passes iff the minimum is ≥ −1e−8.
pub fn verify_supersolution(u: &Supersolution, g: &CurvatureBound, grid: &[f64]) -> Result<ResidualReport> {
    if grid.is_empty() {
        return Err(LabError::TooFewSamples("empty residual grid".into()));
    }
    let mut min_residual = f64::INFINITY;
    let mut argmin = grid[0];
    let mut max_abs: f64 = 0.0;
    for &r in grid {
        let res = u.residual(g, r)?;
        if !res.is_finite() {
            return Err(LabError::NonIntegrable { r, value: g.eval(r) });
        }
        if res < min_residual {
            min_residual = res;
            argmin = r;
        }
        max_abs = max_abs.max(res.abs());
    }
    Ok(ResidualReport {
        supersolution: u.tag(),
        bound: g.tag(),
        min_residual,
        argmin,
        max_abs_residual: max_abs,
        tolerance: RESIDUAL_TOL,
        pass: min_residual >= -RESIDUAL_TOL,
    })
}

/// Solve u' + 2u² + g/2 = 0 with 2ur → 1 at the origin, on (0, r_end].
///
/// Positive bounds can drive u to −∞ before `r_end`; the solution is then
/// returned on the shorter interval with the blow-down radius recorded.
pub fn solve_riccati_equality(g: &CurvatureBound, r_end: f64) -> Result<Supersolution> {
    solve_riccati_with(g, r_end, 1e-13, 1e-15)
}

/// As [`solve_riccati_equality`] with explicit integrator tolerances.
pub fn solve_riccati_with(g: &CurvatureBound, r_end: f64, rtol: f64, atol: f64) -> Result<Supersolution> {
    if !(r_end > R_START) {
        return Err(invalid("r_end", format!("must exceed {R_START}")));
    }
    for r in [R_START, 1e-5, 1e-4] {
        let v = g.eval(r);
        if !v.is_finite() || r * r * v.abs() > 1e-3 {
            return Err(LabError::NonIntegrable { r, value: v });
        }
    }
    let v0 = -g.eval(R_START) / 3.0;
    let i0 = 0.5 * R_START * R_START * v0;
    let y0 = [v0, i0, -0.5 * i0];
    let rhs = |r: f64, y: &[f64; 3]| -> [f64; 3] {
        let v = y[0];
        [-(3.0 * v + g.eval(r)) / r - r * v * v, r * v, (-y[1]).exp_m1() / r]
    };
    let stop = |r: f64, y: &[f64; 3]| {
        let w = 1.0 + r * r * y[0];
        !(w.abs() <= BLOW_DOWN_W)
    };
    let traj = Dopri5::with_tolerances(rtol, atol).integrate_until(rhs, R_START, y0, r_end, stop)?;
    let blow_down = match traj.termination {
        Termination::Stopped(t) => Some(t),
        Termination::Completed => None,
    };
    let end = traj.t_end();
    Ok(Supersolution {
        kind: SuperKind::Numeric(Arc::new(RiccatiSolution {
            traj,
            blow_down,
            bound: g.tag(),
        })),
        origin_normalized: true,
        domain: (R_START, if blow_down.is_some() { end } else { end * (1.0 + 1e-15) }),
    })
}

#[derive(Debug, Clone)]
pub enum ConvexKind {
    /// log r.
    Log,
    /// log tanh(√κ r/2).
    LogTanh { sqrt_kappa: f64 },
    /// log tan(√κ r/2).
    LogTan { sqrt_kappa: f64 },
    /// log sinh r.
    LogSinh,
    /// ∫₁ʳ e^{2A/(ε(1+t)^ε)} e^{−2A/ε} dt/t.
    PowerDecay { a: f64, eps: f64, q_one: f64 },
    /// log ρ(r) of a model, the equality convexifier of its own curvature.
    Model(Arc<RadialKahlerModel>),
    /// Columns `[I, K]` from a Riccati solution.
    Numeric(Arc<Trajectory<2>>),
}

/// Increasing h with ½h'' + h'u = 0, stored in its catalog form; adding
/// `offset` gives the origin-normalized representative.
#[derive(Debug, Clone)]
pub struct Convexifier {
    pub kind: ConvexKind,
    pub offset: f64,
}

/// Growth rate of h against log r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum GrowthExponent {
    Finite(f64),
    Superlogarithmic,
}

impl GrowthExponent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(g) => Some(g),
            Self::Superlogarithmic => None,
        }
    }
}

fn power_decay_q(a: f64, eps: f64, t: f64) -> f64 {
    (2.0 * a / eps * ((1.0 + t).powf(-eps) - 1.0)).exp_m1()
}

/// Q(r) = ∫₀ʳ q(t)/t dt with q = exp(2A/ε((1+t)^{−ε} − 1)) − 1.
fn power_decay_integral(a: f64, eps: f64, r: f64, q_one: Option<f64>) -> Result<f64> {
    let inner = |t: f64| power_decay_q(a, eps, t) / t;
    if r <= 1.0 {
        return Ok(quad::integrate(inner, 0.0, r, 1e-14, 1e-13)?);
    }
    let q1 = match q_one {
        Some(q) => q,
        None => quad::integrate(inner, 0.0, 1.0, 1e-14, 1e-13)?,
    };
    let tail = quad::integrate(|s: f64| power_decay_q(a, eps, s.exp()), 0.0, r.ln(), 1e-14, 1e-13)?;
    Ok(q1 + tail)
}

impl Convexifier {
    pub fn log() -> Self {
        Self {
            kind: ConvexKind::Log,
            offset: 0.0,
        }
    }

    pub fn log_tanh(kappa: f64) -> Self {
        let s = kappa.sqrt();
        Self {
            kind: ConvexKind::LogTanh { sqrt_kappa: s },
            offset: (2.0 / s).ln(),
        }
    }

    pub fn log_tan(kappa: f64) -> Self {
        let s = kappa.sqrt();
        Self {
            kind: ConvexKind::LogTan { sqrt_kappa: s },
            offset: (2.0 / s).ln(),
        }
    }

    pub fn log_sinh() -> Self {
        Self {
            kind: ConvexKind::LogSinh,
            offset: 0.0,
        }
    }

    pub fn power_decay(a: f64, eps: f64) -> Result<Self> {
        if !(a > 0.0) || !(eps > 0.0) {
            return Err(invalid("power_decay", "need A > 0 and eps > 0"));
        }
        let q_one = power_decay_integral(a, eps, 1.0, None)?;
        Ok(Self {
            kind: ConvexKind::PowerDecay { a, eps, q_one },
            offset: q_one,
        })
    }

    /// The convexifier making log M_f − d·h constant for homogeneous f on `model`.
    pub fn exact_for_model(model: &RadialKahlerModel) -> Self {
        match model.profile().kind {
            ProfileKind::Flat => Self::log(),
            ProfileKind::Cigar => Self::log_sinh(),
            ProfileKind::Hyperbolic { sqrt_kappa } => Self::log_tanh(sqrt_kappa * sqrt_kappa),
            ProfileKind::Sphere { sqrt_kappa } => Self::log_tan(sqrt_kappa * sqrt_kappa),
            _ => Self {
                kind: ConvexKind::Model(Arc::new(model.clone())),
                offset: model.profile().lambda(0.0).ln(),
            },
        }
    }

    pub fn tag(&self) -> String {
        match &self.kind {
            ConvexKind::Log => "log_r".into(),
            ConvexKind::LogTanh { sqrt_kappa } => format!("log_tanh(kappa={})", sqrt_kappa * sqrt_kappa),
            ConvexKind::LogTan { sqrt_kappa } => format!("log_tan(kappa={})", sqrt_kappa * sqrt_kappa),
            ConvexKind::LogSinh => "log_sinh".into(),
            ConvexKind::PowerDecay { a, eps, .. } => format!("power_decay(A={a}, eps={eps})"),
            ConvexKind::Model(m) => format!("model({})", m.name()),
            ConvexKind::Numeric(_) => "numeric".into(),
        }
    }

    /// Tag, parameters and normalizing offset for run reports.
    pub fn describe(&self) -> serde_json::Value {
        json!({ "tag": self.tag(), "offset": self.offset })
    }

    fn domain_end(&self) -> f64 {
        match &self.kind {
            ConvexKind::LogTan { sqrt_kappa } => std::f64::consts::PI / sqrt_kappa,
            ConvexKind::Model(m) => m.r_max(),
            ConvexKind::Numeric(t) => t.t_end() * (1.0 + 1e-15),
            _ => f64::INFINITY,
        }
    }

    fn check(&self, r: f64) -> Result<()> {
        let lo = match &self.kind {
            ConvexKind::Numeric(t) => t.t_start(),
            _ => 0.0,
        };
        let hi = self.domain_end();
        if !(r > lo && r < hi) && !(r == lo && lo > 0.0) {
            return Err(LabError::OutOfDomain {
                what: "r",
                value: r,
                lo,
                hi,
            });
        }
        Ok(())
    }

    /// h(r) in catalog form.
    pub fn value(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(match &self.kind {
            ConvexKind::Log => r.ln(),
            ConvexKind::LogTanh { sqrt_kappa } => crate::metric::model::log_tanh(0.5 * sqrt_kappa * r),
            ConvexKind::LogTan { sqrt_kappa } => (0.5 * sqrt_kappa * r).tan().ln(),
            ConvexKind::LogSinh => crate::metric::model::log_sinh(r),
            ConvexKind::PowerDecay { a, eps, q_one } => {
                r.ln() + power_decay_integral(*a, *eps, r, Some(*q_one))? - q_one
            }
            ConvexKind::Model(m) => m.log_rho_of_r(r)?,
            ConvexKind::Numeric(t) => r.ln() + t.eval(r).unwrap()[1],
        })
    }

    /// Origin-normalized h, with e^h/r → 1.
    pub fn normalized(&self, r: f64) -> Result<f64> {
        Ok(self.value(r)? + self.offset)
    }

    pub fn derivative(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(match &self.kind {
            ConvexKind::Log => 1.0 / r,
            ConvexKind::LogTanh { sqrt_kappa: s } => s / (s * r).sinh(),
            ConvexKind::LogTan { sqrt_kappa: s } => s / (s * r).sin(),
            ConvexKind::LogSinh => 1.0 / r.tanh(),
            ConvexKind::PowerDecay { a, eps, .. } => (1.0 + power_decay_q(*a, *eps, r)) / r,
            ConvexKind::Model(m) => 1.0 / m.jacobi_field(r)?.0,
            ConvexKind::Numeric(t) => (-t.eval(r).unwrap()[0]).exp() / r,
        })
    }

    pub fn second_derivative(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(match &self.kind {
            ConvexKind::Log => -1.0 / (r * r),
            ConvexKind::LogTanh { sqrt_kappa: s } => -s * s * (s * r).cosh() / (s * r).sinh().powi(2),
            ConvexKind::LogTan { sqrt_kappa: s } => -s * s * (s * r).cos() / (s * r).sin().powi(2),
            ConvexKind::LogSinh => -1.0 / r.sinh().powi(2),
            ConvexKind::PowerDecay { a, eps, .. } => {
                let hp = (1.0 + power_decay_q(*a, *eps, r)) / r;
                hp * (-2.0 * a * (1.0 + r).powf(-1.0 - eps) - 1.0 / r)
            }
            ConvexKind::Model(m) => {
                let (g, gp) = m.jacobi_field(r)?;
                -gp / (g * g)
            }
            ConvexKind::Numeric(t) => {
                let y = t.eval(r).unwrap();
                let dy = t.eval_derivative(r).unwrap();
                -(-y[0]).exp() * (r * dy[0] + 1.0) / (r * r)
            }
        })
    }

    /// ½h'' + h'u at r.
    pub fn residual(&self, u: &Supersolution, r: f64) -> Result<f64> {
        if let ConvexKind::Numeric(t) = &self.kind {
            // e^{−I}(2ru − 1 − rI')/(2r²), with 2ru − 1 = r·excess.
            self.check(r)?;
            let y = t.eval(r).unwrap();
            let dy = t.eval_derivative(r).unwrap();
            return Ok((-y[0]).exp() * (u.excess(r)? - dy[0]) / (2.0 * r));
        }
        Ok(0.5 * self.second_derivative(r)? + self.derivative(r)? * u.value(r)?)
    }

    /// |e^{h(r₀)}/r₀ − 1| at r₀ = 1e−4 for the normalized representative.
    pub fn normalization_residual(&self) -> Result<f64> {
        Ok(((self.normalized(R_NORMALIZE)? - R_NORMALIZE.ln()).exp_m1()).abs())
    }
}

/// Convexifier built from u via h' = e^{−2∫u} normalized by r·h' → 1.
/// `r_end` bounds the integration for supersolutions defined on (0, ∞).
pub fn solve_convexifier(u: &Supersolution, r_end: f64) -> Result<Convexifier> {
    if !u.origin_normalized {
        return Err(invalid("u", "convexifier needs an origin-normalized supersolution"));
    }
    if let SuperKind::Numeric(sol) = &u.kind {
        let t = sol.traj.project([1, 2]);
        if let Some(radius) = sol.blow_down {
            if r_end > radius {
                return Err(LabError::BlowDown { radius });
            }
        }
        return Ok(Convexifier {
            kind: ConvexKind::Numeric(Arc::new(t)),
            offset: 0.0,
        });
    }
    let end = r_end.min(u.domain.1 * (1.0 - 1e-9));
    // Starting values from the small-r integrals.
    let excess = |t: f64| u.excess(t).unwrap_or(f64::NAN);
    let i_at = |t: f64| quad::gk15(&mut |s| excess(s), 0.0, t).0;
    let i0 = i_at(R_START);
    let k0 = quad::gk15(&mut |t| (-i_at(t)).exp_m1() / t, 0.0, R_START).0;
    let rhs = |r: f64, y: &[f64; 2]| -> [f64; 2] { [excess(r), (-y[0]).exp_m1() / r] };
    let stop = |_r: f64, y: &[f64; 2]| !(y[0].abs() < 700.0);
    let traj = Dopri5::with_tolerances(1e-12, 1e-14).integrate_until(rhs, R_START, [i0, k0], end, stop)?;
    if let Termination::Stopped(radius) = traj.termination {
        return Err(LabError::BlowDown { radius });
    }
    Ok(Convexifier {
        kind: ConvexKind::Numeric(Arc::new(traj)),
        offset: 0.0,
    })
}

/// Closed-form convexifier by catalog tag.
///
/// Tags: `nonneg` (log r), `lower_bound_minus_one` (log tanh(r/2)),
/// `hyperbolic` (`kappa`), `sphere` (`kappa`, log tan), `cigar` (log sinh r),
/// `power_decay` (`A`, `eps`).
pub fn closed_form_convexifier(tag: &str, params: &[(&str, f64)]) -> Result<Convexifier> {
    let get = |k: &str| params.iter().find(|(n, _)| *n == k).map(|(_, v)| *v);
    let kappa = || {
        let k = get("kappa").unwrap_or(1.0);
        if k > 0.0 {
            Ok(k)
        } else {
            Err(invalid("kappa", "must be positive"))
        }
    };
    match tag {
        "nonneg" | "flat" | "log_r" => Ok(Convexifier::log()),
        "lower_bound_minus_one" => Ok(Convexifier::log_tanh(1.0)),
        "hyperbolic" => Ok(Convexifier::log_tanh(kappa()?)),
        "sphere" => Ok(Convexifier::log_tan(kappa()?)),
        "cigar" => Ok(Convexifier::log_sinh()),
        "power_decay" => {
            let a = get("A").ok_or_else(|| invalid("A", "required"))?;
            let eps = get("eps").ok_or_else(|| invalid("eps", "required"))?;
            Convexifier::power_decay(a, eps)
        }
        other => Err(LabError::UnknownTag(other.into())),
    }
}

/// Least-squares slope of h against log r on a log grid over `[lo, hi]`.
/// Reports `Superlogarithmic` when the slope on the upper half of the window
/// exceeds the lower half by more than 10%.
pub fn growth_exponent(h: &Convexifier, lo: f64, hi: f64) -> Result<GrowthExponent> {
    if !(lo > 1.0) || !(hi < h.domain_end()) || !(hi >= 10.0 * lo) {
        return Err(LabError::WindowTooNarrow { lo, hi });
    }
    let grid = logspace(lo, hi, 41);
    let x: Vec<f64> = grid.iter().map(|r| r.ln()).collect();
    let y = grid.iter().map(|&r| h.value(r)).collect::<Result<Vec<f64>>>()?;
    let slope = ls_slope(&x, &y);
    let first = ls_slope(&x[..21], &y[..21]);
    let second = ls_slope(&x[20..], &y[20..]);
    if !slope.is_finite() || !first.is_finite() {
        return Err(LabError::UnstableFit("non-finite slope".into()));
    }
    if second > 1.1 * first && second > first + 1e-9 {
        return Ok(GrowthExponent::Superlogarithmic);
    }
    Ok(GrowthExponent::Finite(slope))
}

/// Matching (u, h, g) triple from the closed-form catalog.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub bound: CurvatureBound,
    pub u: Supersolution,
    pub h: Convexifier,
    /// Upper end of the interval where the pair is checked.
    pub r_check: f64,
}

/// The closed-form (u, h) pairs with the bound each solves with equality
/// (or dominates, for the power-decay family).
pub fn catalog() -> Vec<CatalogEntry> {
    let mut out = vec![
        CatalogEntry {
            name: "nonneg".into(),
            bound: CurvatureBound::Constant(0.0),
            u: Supersolution::flat(),
            h: Convexifier::log(),
            r_check: 20.0,
        },
        CatalogEntry {
            name: "lower_bound_minus_one".into(),
            bound: CurvatureBound::Constant(-1.0),
            u: Supersolution::hyperbolic(1.0),
            h: Convexifier::log_tanh(1.0),
            r_check: 20.0,
        },
        CatalogEntry {
            name: "sphere".into(),
            bound: CurvatureBound::Constant(1.0),
            u: Supersolution::spherical(1.0),
            h: Convexifier::log_tan(1.0),
            r_check: std::f64::consts::PI - 0.1,
        },
        CatalogEntry {
            name: "cigar".into(),
            bound: CurvatureBound::Cigar,
            u: Supersolution::cigar(),
            h: Convexifier::log_sinh(),
            r_check: 20.0,
        },
    ];
    for (a, eps) in [(0.05, 0.49), (1.0, 0.4)] {
        out.push(CatalogEntry {
            name: format!("power_decay(A={a}, eps={eps})"),
            bound: CurvatureBound::PowerDecay { a, eps },
            u: Supersolution::power_decay(a, eps),
            h: Convexifier::power_decay(a, eps).unwrap(),
            r_check: 20.0,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::logspace;

    #[test]
    fn flat_bound_gives_half_over_r() {
        let u = solve_riccati_equality(&CurvatureBound::Constant(0.0), 50.0).unwrap();
        for r in logspace(1e-3, 50.0, 40) {
            let rel = (u.value(r).unwrap() * 2.0 * r - 1.0).abs();
            assert!(rel < 1e-8, "r={r} rel={rel}");
        }
    }

    #[test]
    fn minus_one_bound_gives_coth() {
        let u = solve_riccati_equality(&CurvatureBound::Constant(-1.0), 20.0).unwrap();
        for r in logspace(1e-3, 20.0, 30) {
            let exact = 0.5 / r.tanh();
            assert!((u.value(r).unwrap() - exact).abs() < 1e-8 * exact.max(1.0), "r={r}");
        }
    }

    #[test]
    fn positive_bound_blows_down_at_pi() {
        let u = solve_riccati_equality(&CurvatureBound::Constant(1.0), 10.0).unwrap();
        let radius = u.numeric().unwrap().blow_down().unwrap();
        assert!((radius - std::f64::consts::PI).abs() < 1e-4, "{radius}");
        assert!(matches!(u.value(3.2), Err(LabError::BlowDown { .. })));
    }

    #[test]
    fn non_integrable_bound_rejected() {
        let g = CurvatureBound::custom("1/r^3", |r| 1.0 / r.powi(3));
        assert!(matches!(
            solve_riccati_equality(&g, 1.0),
            Err(LabError::NonIntegrable { .. })
        ));
    }

    #[test]
    fn convexifier_examples() {
        let h = closed_form_convexifier("lower_bound_minus_one", &[]).unwrap();
        assert!((h.derivative(2.0).unwrap() - 0.27572).abs() < 1e-5);
        assert!((h.offset - 2f64.ln()).abs() < 1e-15);
        let h = solve_convexifier(&Supersolution::cigar(), 10.0).unwrap();
        for r in [0.1, 1.0, 5.0] {
            assert!((h.value(r).unwrap() - r.sinh().ln()).abs() < 1e-9, "r={r}");
        }
        assert!(closed_form_convexifier("torus", &[]).is_err());
    }

    #[test]
    fn power_decay_offset_is_consistent() {
        let h = Convexifier::power_decay(0.05, 0.49).unwrap();
        assert!(h.value(1.0).unwrap().abs() < 1e-14);
        assert!(h.normalization_residual().unwrap() < 1e-5);
        let d = diff::first(|r| h.value(r).unwrap(), 3.0, 0.5);
        assert!((d.value - h.derivative(3.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn growth_exponent_cases() {
        let g = growth_exponent(&Convexifier::log(), 10.0, 1e3).unwrap();
        assert!((g.finite().unwrap() - 1.0).abs() < 1e-12);
        let h = Convexifier::power_decay(0.05, 0.5).unwrap();
        let g = growth_exponent(&h, 1e3, 1e5).unwrap().finite().unwrap();
        assert!((g / (-0.2f64).exp() - 1.0).abs() < 0.02, "{g}");
        assert_eq!(
            growth_exponent(&Convexifier::log_sinh(), 5.0, 50.0).unwrap(),
            GrowthExponent::Superlogarithmic
        );
        assert!(growth_exponent(&Convexifier::log(), 2.0, 10.0).is_err());
    }

    #[test]
    fn claim_supersolution_has_zero_residual() {
        let u = Supersolution::inverse_square_claim(0.18, 1.0).unwrap();
        let g = CurvatureBound::inverse_square(0.18, 2.0).unwrap();
        let grid = logspace(2.0, 200.0, 50);
        let rep = verify_supersolution(&u, &g, &grid).unwrap();
        assert!(rep.pass && rep.max_abs_residual < 1e-12, "{rep:?}");
    }
}
