//! Browser bindings. Every export takes plain numbers and strings and
//! returns a JSON document; errors surface as thrown strings.

// Negated comparisons are NaN guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use num_complex::Complex64;
use serde_json::{json, Value};
use threecircle::comparison::{solve_convexifier, solve_riccati_equality, Convexifier, CurvatureBound};
use threecircle::growth::{growth_curve, three_circle_check};
use threecircle::metric::{geodesic_path, ModelSpec, RadialKahlerModel};
use threecircle::numerics::logspace;
use threecircle::poly::HoloPoly;
use wasm_bindgen::prelude::*;

type Out = Result<String, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// `model` is a spec object such as `{"tag": "sphere", "kappa": 1}`.
fn model(spec: &str, n: usize) -> Result<RadialKahlerModel, String> {
    let spec: ModelSpec = serde_json::from_str(spec).map_err(err)?;
    if matches!(spec, ModelSpec::Custom { .. }) {
        return Err("file-backed profiles are not available in the browser".into());
    }
    spec.build(n).map_err(err)
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Growth curve of `f` on `count` log-spaced radii and its convexity in h
/// (`auto` for the model's own convexifier, otherwise log r).
#[allow(clippy::too_many_arguments)]
pub fn three_circle_json(
    spec: &str,
    f: &str,
    center_re: f64,
    center_im: f64,
    r_lo: f64,
    r_hi: f64,
    count: usize,
    h: &str,
) -> Out {
    let f = HoloPoly::parse(f, None).map_err(err)?;
    let m = model(spec, f.n())?;
    if !(r_lo > 0.0 && r_hi > r_lo && r_hi < m.r_max()) || count < 3 {
        return Err(format!("need 0 < r_lo < r_hi < {} and at least 3 radii", m.r_max()));
    }
    let hc = match h {
        "auto" => Convexifier::exact_for_model(&m),
        _ => Convexifier::log(),
    };
    let curve = growth_curve(
        &m,
        &f,
        Complex64::new(center_re, center_im),
        &logspace(r_lo, r_hi, count),
    )
    .map_err(err)?;
    let rep = three_circle_check(&curve, &hc, 1e-6).map_err(err)?;
    let out = json!({
        "model": m.name(),
        "f": f.to_string(),
        "h": hc.tag(),
        "radii": rep.radii,
        "h_values": rep.h_values,
        "log_m": rep.log_m,
        "second_differences": rep.second_differences,
        "min_second_difference": rep.min_second_difference,
        "argmin": rep.argmin,
        "verdict": rep.verdict,
    });
    Ok(out.to_string())
}

/// Riccati solution u and convexifier h for the bound `constant`, `cigar`
/// or `power_decay` on `count` log-spaced radii up to `r_end`.
pub fn riccati_json(bound: &str, value: f64, a: f64, eps: f64, r_end: f64, count: usize) -> Out {
    let g = match bound {
        "constant" => CurvatureBound::Constant(value),
        "cigar" => CurvatureBound::Cigar,
        "power_decay" => CurvatureBound::power_decay(a, eps).map_err(err)?,
        other => return Err(format!("unknown bound `{other}`")),
    };
    if !(r_end > 1e-3) || count < 2 {
        return Err("need r_end > 0.001 and at least 2 samples".into());
    }
    let u = solve_riccati_equality(&g, r_end).map_err(err)?;
    let blow_down = u.numeric().and_then(|s| s.blow_down());
    let end = blow_down.map_or(r_end, |b| 0.95 * b);
    let h = match blow_down {
        None => Some(solve_convexifier(&u, r_end).map_err(err)?),
        Some(_) => None,
    };
    let r = logspace(1e-3, end, count);
    let uv = r
        .iter()
        .map(|&x| u.value(x).map_err(err))
        .collect::<Result<Vec<_>, _>>()?;
    let hv = match &h {
        Some(h) => Some(
            r.iter()
                .map(|&x| h.normalized(x).map_err(err))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let out = json!({ "bound": g.tag(), "r": r, "u": uv, "h": hv, "blow_down": blow_down });
    Ok(out.to_string())
}

/// Length and sampled polyline of the minimizing geodesic from p to q.
pub fn geodesic_json(spec: &str, pr: f64, pi: f64, qr: f64, qi: f64, samples: usize) -> Out {
    let m = model(spec, 1)?;
    let (d, path) = geodesic_path(
        &m,
        Complex64::new(pr, pi),
        Complex64::new(qr, qi),
        samples.clamp(2, 2000),
    )
    .map_err(err)?;
    let pts: Vec<[f64; 2]> = path.iter().map(|z| [z.re, z.im]).collect();
    let out = json!({ "model": m.name(), "distance": d, "path": pts, "rho_max": finite(m.rho_max()) });
    Ok(out.to_string())
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn three_circle(
    spec: &str,
    f: &str,
    center_re: f64,
    center_im: f64,
    r_lo: f64,
    r_hi: f64,
    count: usize,
    h: &str,
) -> Result<String, JsValue> {
    three_circle_json(spec, f, center_re, center_im, r_lo, r_hi, count, h).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn riccati(bound: &str, value: f64, a: f64, eps: f64, r_end: f64, count: usize) -> Result<String, JsValue> {
    riccati_json(bound, value, a, eps, r_end, count).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn geodesic(spec: &str, pr: f64, pi: f64, qr: f64, qi: f64, samples: usize) -> Result<String, JsValue> {
    geodesic_json(spec, pr, pi, qr, qi, samples).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn hyperbolic_violates_log_r() {
        let v = parse(&three_circle_json(r#"{"tag":"hyperbolic"}"#, "z", 0.0, 0.0, 0.5, 1.5, 3, "logr").unwrap());
        assert_eq!(v["verdict"], "violation");
        let v = parse(&three_circle_json(r#"{"tag":"hyperbolic"}"#, "z", 0.0, 0.0, 0.5, 1.5, 3, "auto").unwrap());
        assert_eq!(v["verdict"], "pass");
    }

    #[test]
    fn riccati_flat_is_one_over_2r() {
        let v = parse(&riccati_json("constant", 0.0, 0.0, 0.0, 10.0, 20).unwrap());
        for (r, u) in v["r"].as_array().unwrap().iter().zip(v["u"].as_array().unwrap()) {
            assert!((2.0 * r.as_f64().unwrap() * u.as_f64().unwrap() - 1.0).abs() < 1e-8);
        }
        let v = parse(&riccati_json("constant", 1.0, 0.0, 0.0, 5.0, 20).unwrap());
        assert!((v["blow_down"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-4);
        assert!(v["h"].is_null());
    }

    #[test]
    fn geodesic_on_the_sphere() {
        let v = parse(&geodesic_json(r#"{"tag":"sphere","kappa":1}"#, 0.0, 0.0, 1.0, 0.0, 11).unwrap());
        assert!((v["distance"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
        assert_eq!(v["path"].as_array().unwrap().len(), 11);
        assert!(geodesic_json(r#"{"tag":"custom","path":"x"}"#, 0.0, 0.0, 1.0, 0.0, 5).is_err());
    }
}
