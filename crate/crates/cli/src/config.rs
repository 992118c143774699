//! Run configuration: JSON file merged with command-line flags.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use threecircle::comparison::{
    closed_form_convexifier, solve_convexifier, solve_riccati_equality, Convexifier, CurvatureBound,
};
use threecircle::growth::DEFAULT_SEED;
use threecircle::metric::{builtin_model, ModelSpec, RadialKahlerModel};
use threecircle::numerics::{linspace, logspace};
use threecircle::poly::HoloPoly;

/// A model given either as a bare tag (parameters come from sibling keys)
/// or as a full spec object.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelField {
    Tag(String),
    Spec(ModelSpec),
}

/// Radii as `start:stop:count` or an explicit list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadiiField {
    Range(String),
    List(Vec<f64>),
}

/// Every option a subcommand may read. Each is optional so that a file and
/// the flags can be layered; defaults are applied by the accessors.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelField>,
    pub kappa: Option<f64>,
    pub coeffs: Option<Vec<f64>>,
    pub rho_max: Option<f64>,
    /// Path to a `# rho lambda` table; overrides `model`.
    pub profile: Option<String>,
    pub n: Option<usize>,
    pub f: Option<String>,
    pub center: Option<String>,
    pub radii: Option<RadiiField>,
    pub linear: Option<bool>,
    pub h: Option<String>,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    pub eps: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub c1: Option<f64>,
    #[serde(rename = "B")]
    pub big_b: Option<f64>,
    pub r0: Option<f64>,
    pub tol: Option<f64>,
    pub expect_violation: Option<bool>,
    pub seed: Option<u64>,
    pub csv: Option<String>,
    pub json: Option<String>,
    pub d: Option<f64>,
    pub direction: Option<String>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub rays: Option<usize>,
    pub bound: Option<String>,
    pub verify: Option<String>,
    pub r_end: Option<f64>,
    pub regime: Option<String>,
    pub window: Option<[f64; 2]>,
}

impl RunConfig {
    /// Layer `flags` over the file at `path` (if any). Keys set on the
    /// command line replace the file's values wholesale.
    pub fn load(path: Option<&Path>, flags: &RunConfig) -> Result<(Self, Value)> {
        let mut merged = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                let v: Value =
                    serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?;
                match v {
                    Value::Object(m) => m,
                    _ => bail!("config {} must be a JSON object", p.display()),
                }
            }
            None => Map::new(),
        };
        if let Value::Object(over) = serde_json::to_value(flags)? {
            for (k, v) in over {
                if !v.is_null() {
                    merged.insert(k, v);
                }
            }
        }
        merged.retain(|_, v| !v.is_null());
        let echo = Value::Object(merged);
        let cfg: RunConfig = serde_json::from_value(echo.clone()).context("invalid configuration")?;
        Ok((cfg, echo))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(1)
    }

    pub fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub fn model(&self) -> Result<RadialKahlerModel> {
        let n = self.n();
        if let Some(path) = &self.profile {
            return Ok(ModelSpec::Custom { path: path.clone() }.build(n)?);
        }
        match self.model.as_ref().ok_or_else(|| anyhow!("--model is required"))? {
            ModelField::Spec(spec) => Ok(spec.build(n)?),
            ModelField::Tag(tag) => {
                let mut params = BTreeMap::new();
                if let Some(k) = self.kappa {
                    params.insert("kappa".to_string(), k);
                }
                for (i, c) in self.coeffs.iter().flatten().enumerate() {
                    params.insert(format!("c{i}"), *c);
                }
                if let Some(r) = self.rho_max {
                    params.insert("rho_max".to_string(), r);
                }
                Ok(builtin_model(tag, &params, n)?)
            }
        }
    }

    pub fn function(&self) -> Result<HoloPoly> {
        let text = self.f.as_deref().ok_or_else(|| anyhow!("--f is required"))?;
        Ok(HoloPoly::parse(text, Some(self.n()))?)
    }

    pub fn center(&self) -> Result<Complex64> {
        match &self.center {
            None => Ok(Complex64::new(0.0, 0.0)),
            Some(text) => parse_complex(text),
        }
    }

    /// Radii, or `None` when neither file nor flags give them.
    pub fn radii(&self) -> Result<Option<Vec<f64>>> {
        let radii = match &self.radii {
            None => return Ok(None),
            Some(RadiiField::List(v)) => v.clone(),
            Some(RadiiField::Range(s)) => parse_range(s, self.linear.unwrap_or(false))?,
        };
        if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            bail!("radii must be positive and finite");
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            bail!("radii must be strictly increasing");
        }
        Ok(Some(radii))
    }

    /// Radii checked against the model's domain.
    pub fn radii_in(&self, model: &RadialKahlerModel) -> Result<Vec<f64>> {
        let radii = self.radii()?.ok_or_else(|| anyhow!("--radii is required"))?;
        if let Some(r) = radii.iter().find(|&&r| r >= model.r_max()) {
            bail!(
                "radius {r} is outside the domain of {} (r_max = {})",
                model.name(),
                model.r_max()
            );
        }
        Ok(radii)
    }

    /// The convexifier named by `h`, defaulting to the model's exact one.
    ///
    /// `riccati` solves the comparison equation for the model's own
    /// curvature out to `r_end`.
    pub fn convexifier(&self, model: &RadialKahlerModel, r_end: f64) -> Result<Convexifier> {
        let tag = self.h.as_deref().unwrap_or("auto");
        let mut params = vec![("kappa", self.kappa.unwrap_or(1.0))];
        if let Some(a) = self.a {
            params.push(("A", a));
        }
        if let Some(e) = self.eps {
            params.push(("eps", e));
        }
        Ok(match tag {
            "auto" => Convexifier::exact_for_model(model),
            "logr" | "log_r" => Convexifier::log(),
            "log_tanh" => closed_form_convexifier("hyperbolic", &params)?,
            "log_tan" => closed_form_convexifier("sphere", &params)?,
            "log_sinh" => Convexifier::log_sinh(),
            "riccati" => {
                let u = solve_riccati_equality(&CurvatureBound::from_model(model), r_end)?;
                solve_convexifier(&u, r_end)?
            }
            other => closed_form_convexifier(other, &params)?,
        })
    }
}

/// `start:stop:count`, logarithmic unless `linear`.
pub fn parse_range(text: &str, linear: bool) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let [start, stop, count] = parts[..] else {
        bail!("radii `{text}` must have the form start:stop:count");
    };
    let start: f64 = start.parse().with_context(|| format!("radii start `{start}`"))?;
    let stop: f64 = stop.parse().with_context(|| format!("radii stop `{stop}`"))?;
    let count: usize = count.parse().with_context(|| format!("radii count `{count}`"))?;
    if !(start > 0.0 && stop > start) || count < 1 {
        bail!("radii `{text}` need 0 < start < stop and count ≥ 1");
    }
    Ok(if linear {
        linspace(start, stop, count)
    } else {
        logspace(start, stop, count)
    })
}

/// Complex literal in the polynomial grammar, e.g. `0.5`, `-2i`, `1+0.25i`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let p = HoloPoly::parse(text, Some(1)).with_context(|| format!("complex number `{text}`"))?;
    if p.degree() > 0 {
        bail!("`{text}` is not a constant");
    }
    Ok(p.eval(&[Complex64::new(0.0, 0.0)]))
}

/// A comma-separated list of numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("number `{s}`")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let v = parse_range("1:100:3", false).unwrap();
        assert!(v.len() == 3 && (v[1] - 10.0).abs() < 1e-12 && v[2] == 100.0);
        assert!(parse_range("0:1:3", true).is_err());
        assert_eq!(parse_range("1:3:3", true).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_range("1:2", false).is_err());
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1+0.25i").unwrap(), Complex64::new(1.0, 0.25));
        assert_eq!(parse_complex("-2i").unwrap(), Complex64::new(0.0, -2.0));
        assert!(parse_complex("z").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("lab-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(
            &path,
            r#"{"model": {"tag": "sphere", "kappa": 4}, "f": "z", "tol": 1e-3, "seed": 7}"#,
        )
        .unwrap();
        let flags = RunConfig {
            tol: Some(1e-6),
            ..Default::default()
        };
        let (cfg, echo) = RunConfig::load(Some(&path), &flags).unwrap();
        assert_eq!(cfg.tol, Some(1e-6));
        assert_eq!(cfg.seed(), 7);
        assert!((cfg.model().unwrap().radial_curvature(0.2).unwrap() - 4.0).abs() < 1e-9);
        assert_eq!(echo["tol"], 1e-6);
        std::fs::write(&path, r#"{"modle": "flat"}"#).unwrap();
        assert!(RunConfig::load(Some(&path), &RunConfig::default()).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
