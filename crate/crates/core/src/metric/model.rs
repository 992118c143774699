use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::profile::{parse_profile_table, ProfileKind, RadialProfile};
use crate::error::{invalid, LabError, Result};
use crate::numerics::{diff, quad};

/// U(n)-invariant Kähler metric on (a ball in) ℂⁿ whose restriction to every
/// complex line through the origin is λ(ρ)²|dz|².
#[derive(Debug, Clone, PartialEq)]
pub struct RadialKahlerModel {
    n: usize,
    profile: RadialProfile,
    r_max: f64,
}

/// Serializable description of a model, as used in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Flat {},
    Cigar {},
    Hyperbolic {
        #[serde(default = "one")]
        kappa: f64,
    },
    Sphere {
        #[serde(default = "one")]
        kappa: f64,
    },
    ConformalPoly {
        coeffs: Vec<f64>,
        #[serde(default)]
        rho_max: Option<f64>,
    },
    /// Profile table file with header `# rho lambda`.
    Custom {
        path: String,
    },
    /// Inline profile table.
    Table {
        rho: Vec<f64>,
        lambda: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn build(&self, n: usize) -> Result<RadialKahlerModel> {
        let profile = match self {
            ModelSpec::Flat {} => RadialProfile::flat(),
            ModelSpec::Cigar {} => RadialProfile::cigar(),
            ModelSpec::Hyperbolic { kappa } => RadialProfile::hyperbolic(*kappa)?,
            ModelSpec::Sphere { kappa } => RadialProfile::sphere(*kappa)?,
            ModelSpec::ConformalPoly { coeffs, rho_max } => RadialProfile::conformal_poly(coeffs.clone(), *rho_max)?,
            ModelSpec::Custom { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| LabError::Parse(format!("{path}: {e}")))?;
                let (rho, lambda) = parse_profile_table(&text)?;
                RadialProfile::table(path, rho, lambda)?
            }
            ModelSpec::Table { rho, lambda } => RadialProfile::table("table", rho.clone(), lambda.clone())?,
        };
        RadialKahlerModel::new(profile, n)
    }
}

/// Construct a built-in model from its tag and named parameters.
///
/// Tags: `flat`, `cigar`, `hyperbolic` (`kappa`), `sphere` (`kappa`),
/// `conformal_poly` (`c0`, `c1`, ..., optional `rho_max`).
pub fn builtin_model(tag: &str, params: &BTreeMap<String, f64>, n: usize) -> Result<RadialKahlerModel> {
    let kappa = || params.get("kappa").copied().unwrap_or(1.0);
    let allow = |keys: &[&str]| -> Result<()> {
        for k in params.keys() {
            let ok = keys.contains(&k.as_str())
                || (keys.contains(&"c*") && k.starts_with('c') && k[1..].parse::<usize>().is_ok());
            if !ok {
                return Err(invalid(k, format!("not a parameter of `{tag}`")));
            }
        }
        Ok(())
    };
    let spec = match tag {
        "flat" => {
            allow(&[])?;
            ModelSpec::Flat {}
        }
        "cigar" => {
            allow(&[])?;
            ModelSpec::Cigar {}
        }
        "hyperbolic" => {
            allow(&["kappa"])?;
            ModelSpec::Hyperbolic { kappa: kappa() }
        }
        "sphere" => {
            allow(&["kappa"])?;
            ModelSpec::Sphere { kappa: kappa() }
        }
        "conformal_poly" => {
            allow(&["c*", "rho_max"])?;
            let top = params
                .keys()
                .filter_map(|k| k.strip_prefix('c')?.parse::<usize>().ok())
                .max()
                .ok_or_else(|| invalid("c0", "conformal_poly needs coefficients c0, c1, ..."))?;
            let coeffs = (0..=top)
                .map(|k| params.get(&format!("c{k}")).copied().unwrap_or(0.0))
                .collect();
            ModelSpec::ConformalPoly {
                coeffs,
                rho_max: params.get("rho_max").copied(),
            }
        }
        other => return Err(LabError::UnknownTag(other.into())),
    };
    spec.build(n)
}

impl RadialKahlerModel {
    pub fn new(profile: RadialProfile, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "complex dimension must be at least 1"));
        }
        let mut model = Self {
            n,
            profile,
            r_max: f64::INFINITY,
        };
        model.r_max = match &model.profile.kind {
            ProfileKind::Sphere { sqrt_kappa } => std::f64::consts::PI / sqrt_kappa,
            ProfileKind::Flat | ProfileKind::Cigar | ProfileKind::Hyperbolic { .. } => f64::INFINITY,
            _ if model.profile.rho_max.is_infinite() => f64::INFINITY,
            _ => model.distance_from_origin_unchecked(model.profile.rho_max)?,
        };
        Ok(model)
    }

    pub fn flat(n: usize) -> Self {
        Self::new(RadialProfile::flat(), n).unwrap()
    }

    pub fn cigar(n: usize) -> Self {
        Self::new(RadialProfile::cigar(), n).unwrap()
    }

    pub fn hyperbolic(kappa: f64, n: usize) -> Result<Self> {
        Self::new(RadialProfile::hyperbolic(kappa)?, n)
    }

    pub fn sphere(kappa: f64, n: usize) -> Result<Self> {
        Self::new(RadialProfile::sphere(kappa)?, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn name(&self) -> &str {
        &self.profile.name
    }

    /// Supremum of the distance from the origin over the model.
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn rho_max(&self) -> f64 {
        self.profile.rho_max
    }

    /// True when distances from the origin are bounded (compact or incomplete model).
    pub fn is_bounded(&self) -> bool {
        self.r_max.is_finite()
    }

    /// First radius where the circumferential Jacobian vanishes.
    pub fn conjugate_radius(&self) -> f64 {
        match self.profile.kind {
            ProfileKind::Sphere { sqrt_kappa } => std::f64::consts::PI / sqrt_kappa,
            _ => f64::INFINITY,
        }
    }

    fn check_rho(&self, rho: f64) -> Result<()> {
        if !(rho >= 0.0 && rho < self.profile.rho_max) && !(rho == 0.0) {
            return Err(LabError::OutOfDomain {
                what: "rho",
                value: rho,
                lo: 0.0,
                hi: self.profile.rho_max,
            });
        }
        Ok(())
    }

    fn check_r(&self, r: f64) -> Result<()> {
        if !(r >= 0.0 && r < self.r_max) {
            return Err(LabError::OutOfDomain {
                what: "r",
                value: r,
                lo: 0.0,
                hi: self.r_max,
            });
        }
        Ok(())
    }

    fn distance_from_origin_unchecked(&self, rho: f64) -> Result<f64> {
        Ok(match &self.profile.kind {
            ProfileKind::Flat => rho,
            ProfileKind::Cigar => rho.asinh(),
            ProfileKind::Hyperbolic { sqrt_kappa } => 2.0 / sqrt_kappa * rho.atanh(),
            ProfileKind::Sphere { sqrt_kappa } => 2.0 / sqrt_kappa * rho.atan(),
            ProfileKind::ConformalPoly { coeffs } => {
                let t = rho * rho;
                coeffs
                    .iter()
                    .enumerate()
                    .rev()
                    .fold(0.0, |acc, (k, c)| acc * t + c / (2 * k + 1) as f64)
                    * rho
            }
            ProfileKind::Table(t) => t.distance(rho)?,
        })
    }

    /// Geodesic distance r(ρ) = ∫₀^ρ λ from the origin to a point of norm ρ.
    pub fn distance_from_origin(&self, rho: f64) -> Result<f64> {
        self.check_rho(rho)?;
        self.distance_from_origin_unchecked(rho)
    }

    /// Same distance by adaptive quadrature of λ, independent of closed forms.
    pub fn distance_by_quadrature(&self, rho: f64) -> Result<f64> {
        self.check_rho(rho)?;
        let p = &self.profile;
        Ok(quad::integrate(|t| p.lambda(t), 0.0, rho, 1e-10, 0.0)?)
    }

    /// Euclidean norm ρ(r) of a point at distance r from the origin.
    pub fn rho_of_r(&self, r: f64) -> Result<f64> {
        self.check_r(r)?;
        Ok(match &self.profile.kind {
            ProfileKind::Flat => r,
            ProfileKind::Cigar => r.sinh(),
            ProfileKind::Hyperbolic { sqrt_kappa } => (0.5 * sqrt_kappa * r).tanh(),
            ProfileKind::Sphere { sqrt_kappa } => (0.5 * sqrt_kappa * r).tan(),
            _ => self.invert_distance(r)?,
        })
    }

    /// log ρ(r) without overflow for large r.
    pub fn log_rho_of_r(&self, r: f64) -> Result<f64> {
        self.check_r(r)?;
        Ok(match &self.profile.kind {
            ProfileKind::Flat => r.ln(),
            ProfileKind::Cigar => log_sinh(r),
            ProfileKind::Hyperbolic { sqrt_kappa } => log_tanh(0.5 * sqrt_kappa * r),
            ProfileKind::Sphere { sqrt_kappa } => (0.5 * sqrt_kappa * r).tan().ln(),
            _ => self.invert_distance(r)?.ln(),
        })
    }

    /// Safeguarded Newton iteration on r(ρ) = r, using dr/dρ = λ.
    fn invert_distance(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let rho_max = self.profile.rho_max;
        let mut lo = 0.0;
        let mut hi = if rho_max.is_finite() {
            rho_max
        } else {
            let mut hi = r / self.profile.lambda(0.0);
            while self.distance_from_origin_unchecked(hi)? < r {
                lo = hi;
                hi *= 2.0;
                if !hi.is_finite() {
                    return Err(invalid("r", "cannot bracket the inverse distance"));
                }
            }
            hi
        };
        let mut rho = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.distance_from_origin_unchecked(rho)? - r;
            if f == 0.0 {
                return Ok(rho);
            }
            if f > 0.0 {
                hi = rho;
            } else {
                lo = rho;
            }
            let step = f / self.profile.lambda(rho);
            let mut next = rho - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - rho).abs() <= 1e-12 * rho.max(1e-300) || hi - lo <= 1e-15 * hi {
                return Ok(next);
            }
            rho = next;
        }
        Ok(rho)
    }

    /// Distance from the origin of a point in ℂⁿ given by its coordinates.
    pub fn distance_of_point(&self, z: &[num_complex::Complex64]) -> Result<f64> {
        let rho = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        self.distance_from_origin(rho)
    }

    /// Gaussian curvature K(r) of the complex lines through the origin.
    pub fn radial_curvature(&self, r: f64) -> Result<f64> {
        self.check_r(r)?;
        Ok(match &self.profile.kind {
            ProfileKind::Flat => 0.0,
            ProfileKind::Cigar => 2.0 / r.cosh().powi(2),
            ProfileKind::Hyperbolic { sqrt_kappa } => -sqrt_kappa * sqrt_kappa,
            ProfileKind::Sphere { sqrt_kappa } => sqrt_kappa * sqrt_kappa,
            _ => self.profile.curvature_at_rho(self.rho_of_r(r)?),
        })
    }

    /// K(r) from finite differences of log λ with Richardson extrapolation.
    /// Independent of the closed forms; used as a cross-check.
    pub fn radial_curvature_numeric(&self, r: f64) -> Result<f64> {
        let rho = self.rho_of_r(r)?;
        let p = &self.profile;
        let psi = |x: f64| p.lambda(x).ln();
        let room = if p.rho_max.is_finite() {
            0.4 * (p.rho_max - rho)
        } else {
            f64::INFINITY
        };
        let floor = (1e-4 * rho).max(1e-5);
        let h0 = (0.1 * rho.max(0.1)).min(room).max(floor);
        let l = p.lambda(rho);
        let (laplacian, error) = if rho < 1e-4 {
            // ψ'/ρ → ψ''(0), so Δψ = 2ψ''(0).
            let d2 = diff::second(psi, 0.0, h0);
            (2.0 * d2.value, 2.0 * d2.error)
        } else {
            let d1 = diff::first(psi, rho, h0);
            let d2 = diff::second(psi, rho, h0);
            (d2.value + d1.value / rho, d2.error + d1.error / rho)
        };
        if !(error <= 1e-6 * laplacian.abs().max(1.0)) {
            return Err(LabError::RefinementFailure { rho, error });
        }
        Ok(-laplacian / (l * l))
    }

    /// Circumferential Jacobian G(r) = λρ and its derivative G'(r) = 1 + ρλ'/λ.
    pub fn jacobi_field(&self, r: f64) -> Result<(f64, f64)> {
        self.check_r(r)?;
        Ok(match &self.profile.kind {
            ProfileKind::Flat => (r, 1.0),
            ProfileKind::Cigar => (r.tanh(), 1.0 / r.cosh().powi(2)),
            ProfileKind::Hyperbolic { sqrt_kappa: s } => ((s * r).sinh() / s, (s * r).cosh()),
            ProfileKind::Sphere { sqrt_kappa: s } => ((s * r).sin() / s, (s * r).cos()),
            _ => {
                let rho = self.rho_of_r(r)?;
                let l = self.profile.lambda(rho);
                let rho_lp = self.profile.dlambda_over_rho(rho) * rho * rho;
                (l * rho, 1.0 + rho_lp / l)
            }
        })
    }

    /// Hessian coefficient u(r) = G'/(2G) of the distance function, so that
    /// ∇²r = 2u on the complex radial plane.
    pub fn model_hessian(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(LabError::OutOfDomain {
                what: "r",
                value: r,
                lo: 0.0,
                hi: self.r_max,
            });
        }
        if r >= self.conjugate_radius() {
            return Err(LabError::ConjugatePoint { r });
        }
        self.check_r(r)?;
        Ok(match &self.profile.kind {
            ProfileKind::Flat => 0.5 / r,
            ProfileKind::Cigar => 1.0 / (2.0 * r).sinh(),
            ProfileKind::Hyperbolic { sqrt_kappa: s } => 0.5 * s / (s * r).tanh(),
            ProfileKind::Sphere { sqrt_kappa: s } => {
                let sn = (s * r).sin();
                if sn <= 0.0 {
                    return Err(LabError::ConjugatePoint { r });
                }
                0.5 * s * (s * r).cos() / sn
            }
            _ => {
                let (g, gp) = self.jacobi_field(r)?;
                if !(g > 0.0) {
                    return Err(LabError::ConjugatePoint { r });
                }
                gp / (2.0 * g)
            }
        })
    }

    /// The function h with ½h'' + h'u = 0 and h − log r → 0 at the origin:
    /// h = log ρ(r) − log λ(0). It makes log M_f(r) − d·h constant for
    /// homogeneous f of degree d.
    pub fn exact_convexifier(&self, r: f64) -> Result<f64> {
        Ok(self.log_rho_of_r(r)? + self.profile.lambda(0.0).ln())
    }
}

pub(crate) fn log_sinh(r: f64) -> f64 {
    if r > 20.0 {
        r - std::f64::consts::LN_2 + (-(-2.0 * r).exp()).ln_1p()
    } else {
        r.sinh().ln()
    }
}

pub(crate) fn log_tanh(x: f64) -> f64 {
    if x > 1.0 {
        let e = (-2.0 * x).exp();
        (-e).ln_1p() - e.ln_1p()
    } else {
        x.tanh().ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_model() -> RadialKahlerModel {
        RadialKahlerModel::new(RadialProfile::conformal_poly(vec![1.0, 1.0], None).unwrap(), 1).unwrap()
    }

    #[test]
    fn closed_form_distances_match_quadrature() {
        let models = [
            RadialKahlerModel::cigar(1),
            RadialKahlerModel::hyperbolic(1.0, 1).unwrap(),
            RadialKahlerModel::sphere(2.0, 1).unwrap(),
            poly_model(),
        ];
        for m in &models {
            for &rho in &[0.05, 0.3, 0.9] {
                let a = m.distance_from_origin(rho).unwrap();
                let b = m.distance_by_quadrature(rho).unwrap();
                assert!((a - b).abs() < 1e-10, "{}: {a} vs {b}", m.name());
            }
        }
    }

    #[test]
    fn inverse_distance_round_trips() {
        let m = poly_model();
        for &r in &[1e-3, 0.5, 2.0, 40.0] {
            let rho = m.rho_of_r(r).unwrap();
            assert!((m.distance_from_origin(rho).unwrap() - r).abs() < 1e-10 * r.max(1.0));
        }
    }

    #[test]
    fn domains_are_enforced() {
        let h = RadialKahlerModel::hyperbolic(1.0, 1).unwrap();
        assert!(h.distance_from_origin(1.0).is_err());
        let s = RadialKahlerModel::sphere(1.0, 2).unwrap();
        assert!(s.rho_of_r(std::f64::consts::PI).is_err());
        assert!(matches!(
            s.model_hessian(std::f64::consts::PI),
            Err(LabError::ConjugatePoint { .. })
        ));
        assert!(RadialKahlerModel::flat(1).model_hessian(0.0).is_err());
    }

    #[test]
    fn analytic_and_numeric_curvature_agree() {
        let models = [
            RadialKahlerModel::cigar(1),
            RadialKahlerModel::hyperbolic(1.5, 1).unwrap(),
            RadialKahlerModel::sphere(0.7, 1).unwrap(),
            poly_model(),
        ];
        for m in &models {
            for &r in &[0.0, 0.05, 0.4, 1.7] {
                let a = m.radial_curvature(r).unwrap();
                let b = m.radial_curvature_numeric(r).unwrap();
                let c = m.profile().curvature_at_rho(m.rho_of_r(r).unwrap());
                assert!((a - b).abs() < 1e-6, "{} r={r}: {a} vs {b}", m.name());
                assert!((a - c).abs() < 1e-10, "{} r={r}: {a} vs {c}", m.name());
            }
        }
    }

    #[test]
    fn hessian_matches_jacobian_ratio() {
        let m = RadialKahlerModel::cigar(1);
        for &r in &[0.1, 1.0, 3.0] {
            let (g, gp) = m.jacobi_field(r).unwrap();
            assert!((m.model_hessian(r).unwrap() - gp / (2.0 * g)).abs() < 1e-14);
        }
    }

    #[test]
    fn builtin_tags_and_params() {
        let mut p = BTreeMap::new();
        assert_eq!(builtin_model("flat", &p, 2).unwrap().n(), 2);
        assert!(matches!(builtin_model("torus", &p, 1), Err(LabError::UnknownTag(_))));
        p.insert("kappa".to_string(), 4.0);
        let s = builtin_model("sphere", &p, 1).unwrap();
        assert!((s.r_max() - std::f64::consts::PI / 2.0).abs() < 1e-15);
        assert!(builtin_model("flat", &p, 1).is_err());
        let mut q = BTreeMap::new();
        q.insert("c0".to_string(), 1.0);
        q.insert("c2".to_string(), 0.5);
        let m = builtin_model("conformal_poly", &q, 1).unwrap();
        assert!((m.profile().lambda(1.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn model_spec_json_round_trip() {
        let spec: ModelSpec = serde_json::from_str(r#"{"tag":"hyperbolic","kappa":2.0}"#).unwrap();
        assert_eq!(spec, ModelSpec::Hyperbolic { kappa: 2.0 });
        let spec: ModelSpec = serde_json::from_str(r#"{"tag":"sphere"}"#).unwrap();
        assert_eq!(spec, ModelSpec::Sphere { kappa: 1.0 });
        assert!(serde_json::from_str::<ModelSpec>(r#"{"tag":"flat","kappa":1}"#).is_err());
    }

    #[test]
    fn stable_logs() {
        assert!((log_sinh(30.0) - 30.0f64.sinh().ln()).abs() < 1e-12);
        assert!((log_sinh(800.0) - (800.0 - std::f64::consts::LN_2)).abs() < 1e-12);
        assert!((log_tanh(3.0) - 3.0f64.tanh().ln()).abs() < 1e-15);
        assert!(log_tanh(400.0) == 0.0);
    }
}
