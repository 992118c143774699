//! Conformal factors λ(ρ) of rotationally symmetric metrics λ(ρ)²|dz|².

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::numerics::{quad, spline::EvenSpline};

/// Tabulated profile: spline through `(ρ, λ)` with cumulative distances at the knots.
#[derive(Debug, Clone, PartialEq)]
pub struct TableProfile {
    spline: EvenSpline,
    cumulative: Vec<f64>,
}

impl TableProfile {
    pub fn knots(&self) -> &[f64] {
        self.spline.knots()
    }

    pub fn values(&self) -> &[f64] {
        self.spline.values()
    }

    pub(crate) fn distance(&self, rho: f64) -> Result<f64> {
        let i = self.spline.segment_of(rho);
        let x0 = self.spline.knots()[i];
        let s = &self.spline;
        let tail = quad::integrate(|t| s.eval3(t).0, x0, rho, 1e-12, 0.0)?;
        Ok(self.cumulative[i] + tail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    Flat,
    Cigar,
    /// λ = 2/(√κ (1 - ρ²)) on the unit disk.
    Hyperbolic {
        sqrt_kappa: f64,
    },
    /// λ = 2/(√κ (1 + ρ²)), stereographic chart of the round sphere.
    Sphere {
        sqrt_kappa: f64,
    },
    /// λ = Σ c_k ρ^{2k}.
    ConformalPoly {
        coeffs: Vec<f64>,
    },
    Table(Arc<TableProfile>),
}

/// Conformal factor of the metric on a complex line through the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub kind: ProfileKind,
    /// Upper endpoint of the ρ-domain, possibly infinite.
    pub rho_max: f64,
    pub name: String,
}

fn poly_eval(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

impl RadialProfile {
    pub fn flat() -> Self {
        Self {
            kind: ProfileKind::Flat,
            rho_max: f64::INFINITY,
            name: "flat".into(),
        }
    }

    pub fn cigar() -> Self {
        Self {
            kind: ProfileKind::Cigar,
            rho_max: f64::INFINITY,
            name: "cigar".into(),
        }
    }

    pub fn hyperbolic(kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(Self {
            kind: ProfileKind::Hyperbolic {
                sqrt_kappa: kappa.sqrt(),
            },
            rho_max: 1.0,
            name: format!("hyperbolic({kappa})"),
        })
    }

    pub fn sphere(kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(Self {
            kind: ProfileKind::Sphere {
                sqrt_kappa: kappa.sqrt(),
            },
            rho_max: f64::INFINITY,
            name: format!("sphere({kappa})"),
        })
    }

    /// λ(ρ) = Σ coeffs[k] ρ^{2k}, checked positive on `[0, rho_max)`.
    pub fn conformal_poly(coeffs: Vec<f64>, rho_max: Option<f64>) -> Result<Self> {
        let coeffs: Vec<f64> = {
            let mut c = coeffs;
            while c.len() > 1 && *c.last().unwrap() == 0.0 {
                c.pop();
            }
            c
        };
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(crate::error::invalid("coeffs", "need finite coefficients"));
        }
        let name = format!(
            "conformal_poly({})",
            coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
        );
        if coeffs[0] <= 0.0 {
            return Err(LabError::NonPositiveProfile { name, rho: 0.0 });
        }
        let rho_max = rho_max.unwrap_or(f64::INFINITY);
        if !(rho_max > 0.0) {
            return Err(crate::error::invalid("rho_max", "must be positive"));
        }
        // Beyond the Cauchy root bound in t = ρ² the sign equals the leading sign.
        let top = *coeffs.last().unwrap();
        let cauchy = 1.0
            + coeffs[..coeffs.len() - 1]
                .iter()
                .map(|c| (c / top).abs())
                .fold(0.0, f64::max);
        if rho_max.is_infinite() && top < 0.0 {
            return Err(LabError::NonPositiveProfile {
                name,
                rho: cauchy.sqrt(),
            });
        }
        let t_hi = if rho_max.is_finite() {
            (rho_max * rho_max).min(cauchy)
        } else {
            cauchy
        };
        let samples = 4000;
        for i in 0..=samples {
            let t = t_hi * i as f64 / samples as f64;
            if poly_eval(&coeffs, t) <= 0.0 {
                return Err(LabError::NonPositiveProfile { name, rho: t.sqrt() });
            }
        }
        if rho_max.is_finite() && poly_eval(&coeffs, rho_max * rho_max) <= 0.0 {
            return Err(LabError::NonPositiveProfile { name, rho: rho_max });
        }
        Ok(Self {
            kind: ProfileKind::ConformalPoly { coeffs },
            rho_max,
            name,
        })
    }

    /// Spline profile through a `(ρ, λ)` table; ρ strictly increasing from 0.
    pub fn table(name: &str, rho: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        if rho.len() < 4 || rho.len() != lambda.len() {
            return Err(crate::error::invalid(
                "table",
                "need at least 4 rows with matching columns",
            ));
        }
        if rho[0] != 0.0 {
            return Err(crate::error::invalid("table", "first rho must be 0"));
        }
        if rho.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(crate::error::invalid("table", "rho must be strictly increasing"));
        }
        if let Some(i) = lambda.iter().position(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(LabError::NonPositiveProfile {
                name: name.into(),
                rho: rho[i],
            });
        }
        let spline = EvenSpline::new(rho, lambda);
        // The spline may undershoot between knots.
        let knots = spline.knots().to_vec();
        for w in knots.windows(2) {
            for j in 1..16 {
                let t = w[0] + (w[1] - w[0]) * j as f64 / 16.0;
                if spline.eval3(t).0 <= 0.0 {
                    return Err(LabError::NonPositiveProfile {
                        name: name.into(),
                        rho: t,
                    });
                }
            }
        }
        let mut cumulative = vec![0.0; knots.len()];
        for i in 1..knots.len() {
            let seg = quad::integrate(|t| spline.eval3(t).0, knots[i - 1], knots[i], 1e-12, 0.0)?;
            cumulative[i] = cumulative[i - 1] + seg;
        }
        let rho_max = *knots.last().unwrap();
        Ok(Self {
            kind: ProfileKind::Table(Arc::new(TableProfile { spline, cumulative })),
            rho_max,
            name: name.into(),
        })
    }

    /// Line profile of a U(n)-invariant potential φ(t), t = |z|²: the metric on
    /// a complex line through the origin is (φ'(t) + tφ''(t))|dz|².
    pub fn from_potential<F, G>(name: &str, dphi: F, d2phi: G, rho: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let lambda = rho
            .iter()
            .map(|r| {
                let t = r * r;
                let l2 = dphi(t) + t * d2phi(t);
                if l2 > 0.0 {
                    l2.sqrt()
                } else {
                    f64::NAN
                }
            })
            .collect();
        Self::table(name, rho, lambda)
    }

    pub fn lambda(&self, rho: f64) -> f64 {
        let p = rho.abs();
        match &self.kind {
            ProfileKind::Flat => 1.0,
            ProfileKind::Cigar => 1.0 / (1.0 + p * p).sqrt(),
            ProfileKind::Hyperbolic { sqrt_kappa } => 2.0 / (sqrt_kappa * (1.0 - p * p)),
            ProfileKind::Sphere { sqrt_kappa } => 2.0 / (sqrt_kappa * (1.0 + p * p)),
            ProfileKind::ConformalPoly { coeffs } => poly_eval(coeffs, p * p),
            ProfileKind::Table(t) => t.spline.eval3(p).0,
        }
    }

    /// λ'(ρ)/ρ, finite at the origin.
    pub fn dlambda_over_rho(&self, rho: f64) -> f64 {
        let p = rho.abs();
        match &self.kind {
            ProfileKind::Flat => 0.0,
            ProfileKind::Cigar => -(1.0 + p * p).powf(-1.5),
            ProfileKind::Hyperbolic { sqrt_kappa } => 4.0 / (sqrt_kappa * (1.0 - p * p).powi(2)),
            ProfileKind::Sphere { sqrt_kappa } => -4.0 / (sqrt_kappa * (1.0 + p * p).powi(2)),
            ProfileKind::ConformalPoly { coeffs } => {
                let t = p * p;
                coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, (k, c)| acc * t + 2.0 * k as f64 * c)
            }
            ProfileKind::Table(t) => {
                let (_, d1, d2) = t.spline.eval3(p);
                if p > 1e-6 {
                    d1 / p
                } else {
                    d2
                }
            }
        }
    }

    pub fn dlambda(&self, rho: f64) -> f64 {
        let p = rho.abs();
        let v = match &self.kind {
            ProfileKind::Table(t) => t.spline.eval3(p).1,
            _ => self.dlambda_over_rho(p) * p,
        };
        v * rho.signum()
    }

    pub fn d2lambda(&self, rho: f64) -> f64 {
        let p = rho.abs();
        match &self.kind {
            ProfileKind::Flat => 0.0,
            ProfileKind::Cigar => (2.0 * p * p - 1.0) * (1.0 + p * p).powf(-2.5),
            ProfileKind::Hyperbolic { sqrt_kappa } => 4.0 * (1.0 + 3.0 * p * p) / (sqrt_kappa * (1.0 - p * p).powi(3)),
            ProfileKind::Sphere { sqrt_kappa } => 4.0 * (3.0 * p * p - 1.0) / (sqrt_kappa * (1.0 + p * p).powi(3)),
            ProfileKind::ConformalPoly { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| {
                    let e = 2 * k;
                    (e * (e - 1)) as f64 * c * p.powi(e as i32 - 2)
                })
                .sum(),
            ProfileKind::Table(t) => t.spline.eval3(p).2,
        }
    }

    /// Gaussian curvature −λ⁻² Δ₀ log λ from the analytic derivatives.
    pub fn curvature_at_rho(&self, rho: f64) -> f64 {
        let l = self.lambda(rho);
        let lp_over_rho = self.dlambda_over_rho(rho);
        let lp = lp_over_rho * rho;
        let lpp = self.d2lambda(rho);
        let psi_p_over_rho = lp_over_rho / l;
        let psi_pp = lpp / l - (lp / l).powi(2);
        -(psi_pp + psi_p_over_rho) / (l * l)
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(crate::error::invalid("kappa", format!("must be positive, got {kappa}")));
    }
    Ok(())
}

/// Parse a two-column `(ρ, λ)` table with header `# rho lambda`.
pub fn parse_profile_table(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| LabError::Parse("empty profile table".into()))?;
    let cols: Vec<&str> = header.trim_start_matches('#').split_whitespace().collect();
    if !header.starts_with('#') || cols != ["rho", "lambda"] {
        return Err(LabError::Parse(format!(
            "expected header `# rho lambda`, found `{header}`"
        )));
    }
    let mut rho = Vec::new();
    let mut lambda = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(LabError::Parse(format!(
                "row {}: expected two columns, found `{line}`",
                lineno + 2
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| LabError::Parse(format!("row {}: {e}", lineno + 2)))
        };
        rho.push(parse(parts[0])?);
        lambda.push(parse(parts[1])?);
    }
    Ok((rho, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_profiles_have_expected_values() {
        assert_eq!(RadialProfile::flat().lambda(3.0), 1.0);
        assert!((RadialProfile::cigar().lambda(1.0) - 0.5f64.sqrt()).abs() < 1e-15);
        let h = RadialProfile::hyperbolic(1.0).unwrap();
        assert!((h.lambda(0.5) - 2.0 / 0.75).abs() < 1e-15);
        let s = RadialProfile::sphere(1.0).unwrap();
        assert!((s.lambda(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let profiles = [
            RadialProfile::cigar(),
            RadialProfile::hyperbolic(2.0).unwrap(),
            RadialProfile::sphere(0.5).unwrap(),
            RadialProfile::conformal_poly(vec![1.0, 0.5, 0.25], None).unwrap(),
        ];
        for p in &profiles {
            for &rho in &[0.1, 0.4, 0.7] {
                let d1 = crate::numerics::diff::first(|x| p.lambda(x), rho, 0.01);
                let d2 = crate::numerics::diff::second(|x| p.lambda(x), rho, 0.01);
                assert!((d1.value - p.dlambda(rho)).abs() < 1e-8, "{} {rho}", p.name);
                assert!((d2.value - p.d2lambda(rho)).abs() < 1e-6, "{} {rho}", p.name);
            }
        }
    }

    #[test]
    fn conformal_poly_rejects_nonpositive() {
        assert!(matches!(
            RadialProfile::conformal_poly(vec![0.0, 1.0], None),
            Err(LabError::NonPositiveProfile { .. })
        ));
        assert!(matches!(
            RadialProfile::conformal_poly(vec![1.0, -1.0], None),
            Err(LabError::NonPositiveProfile { .. })
        ));
        // Allowed once the domain stops short of the root at ρ = 1.
        assert!(RadialProfile::conformal_poly(vec![1.0, -1.0], Some(0.9)).is_ok());
        assert!(RadialProfile::conformal_poly(vec![1.0, -1.0], Some(1.1)).is_err());
    }

    #[test]
    fn kappa_must_be_positive() {
        assert!(RadialProfile::hyperbolic(0.0).is_err());
        assert!(RadialProfile::sphere(-1.0).is_err());
    }

    #[test]
    fn table_parsing_and_validation() {
        let text = "# rho lambda\n0 1\n0.5 1.1\n1.0 1.3\n1.5 1.6\n";
        let (r, l) = parse_profile_table(text).unwrap();
        assert_eq!(r, vec![0.0, 0.5, 1.0, 1.5]);
        assert!(RadialProfile::table("t", r, l).is_ok());
        assert!(parse_profile_table("rho lambda\n0 1\n").is_err());
        assert!(parse_profile_table("# rho lambda\n0 1 2\n").is_err());
        let bad = RadialProfile::table("t", vec![0.0, 0.5, 0.4, 1.0], vec![1.0; 4]);
        assert!(bad.is_err());
        let neg = RadialProfile::table("t", vec![0.0, 0.5, 1.0, 1.5], vec![1.0, 1.0, -0.1, 1.0]);
        assert!(matches!(neg, Err(LabError::NonPositiveProfile { .. })));
    }

    #[test]
    fn potential_reduction_reproduces_flat_line() {
        // φ(t) = t gives the Euclidean metric.
        let rho: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let p = RadialProfile::from_potential("euclid", |_| 1.0, |_| 0.0, rho).unwrap();
        assert!((p.lambda(2.345) - 1.0).abs() < 1e-12);
        // φ(t) = log(1 + t) is Fubini–Study: λ² = 1/(1+t)², i.e. the sphere with κ = 4.
        let rho: Vec<f64> = (0..400).map(|i| i as f64 * 0.01).collect();
        let p = RadialProfile::from_potential("fs", |t| 1.0 / (1.0 + t), |t| -1.0 / (1.0 + t).powi(2), rho).unwrap();
        let s = RadialProfile::sphere(4.0).unwrap();
        assert!((p.lambda(0.77) - s.lambda(0.77)).abs() < 1e-6);
    }
}
