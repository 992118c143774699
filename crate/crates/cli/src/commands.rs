//! One function per subcommand. Each returns the report, an optional CSV
//! body and a one-line headline for the terminal.

use anyhow::{anyhow, bail, Result};
use serde_json::{json, Value};
use threecircle::comparison::{
    solve_convexifier, solve_riccati_equality, verify_supersolution, CurvatureBound, Supersolution, RESIDUAL_TOL,
};
use threecircle::dimension::{dim_bound_from_h, dim_poly_space, exp_growth_bound, power_decay_regimes};
use threecircle::growth::{
    deficit_grid, growth_curve_seeded, homogeneity_check, monotonicity_check, necessity_deficit, three_circle_check,
    Direction, Verdict,
};
use threecircle::metric::RadialKahlerModel;
use threecircle::numerics::logspace;
use threecircle::poly::HoloPoly;
use threecircle::report::{curve_csv, samples_csv, CheckResult, RunReport};
use threecircle::suite::run_suite;

use crate::config::{parse_range, RunConfig};

pub struct Outcome {
    pub report: RunReport,
    pub csv: Option<String>,
    pub headline: String,
}

fn outcome(report: RunReport, csv: Option<String>, headline: String) -> Result<Outcome> {
    Ok(Outcome { report, csv, headline })
}

pub fn curvature(cfg: &RunConfig, echo: Value) -> Result<Outcome> {
    let model = cfg.model()?;
    let radii = cfg.radii_in(&model)?;
    let tol = cfg.tol(1e-6);
    let mut csv = String::from("r,rho,K,K_numeric,hessian\n");
    let mut gap: f64 = 0.0;
    let mut worst_at = radii[0];
    for &r in &radii {
        let k = model.radial_curvature(r)?;
        let kn = model.radial_curvature_numeric(r)?;
        // Past the conjugate radius the Hessian is undefined; leave the cell empty.
        let hess = model.model_hessian(r).map(|v| v.to_string()).unwrap_or_default();
        csv.push_str(&format!("{r},{},{k},{kn},{hess}\n", model.rho_of_r(r)?));
        if (k - kn).abs() > gap {
            gap = (k - kn).abs();
            worst_at = r;
        }
    }
    let mut report = RunReport::new("curvature", echo, cfg.seed());
    report.push(CheckResult::from_bool(
        "curvature_closed_vs_numeric",
        gap <= tol,
        Some(tol),
        json!({ "max_abs_difference": gap, "at": worst_at }),
    ));
    report.results = json!({ "model": model.name(), "r_max": finite_or_null(model.r_max()), "samples": radii.len() });
    let headline = format!("{}: |K - K_numeric| ≤ {gap:.2e} on {} radii", model.name(), radii.len());
    outcome(report, Some(csv), headline)
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn need(value: Option<f64>, name: &str) -> Result<f64> {
    value.ok_or_else(|| anyhow!("--{name} is required"))
}

fn curvature_bound(cfg: &RunConfig) -> Result<CurvatureBound> {
    let tag = cfg.bound.as_deref().unwrap_or("model");
    let (head, arg) = match tag.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (tag, None),
    };
    Ok(match head {
        "constant" => {
            let v: f64 = arg.ok_or_else(|| anyhow!("use --bound constant:VALUE"))?.parse()?;
            CurvatureBound::Constant(v)
        }
        "cigar" => CurvatureBound::Cigar,
        "power_decay" => CurvatureBound::power_decay(need(cfg.a, "A")?, need(cfg.eps, "eps")?)?,
        "inverse_square" => CurvatureBound::inverse_square(need(cfg.c, "C")?, cfg.r0.unwrap_or(1.0))?,
        "model" => CurvatureBound::from_model(&cfg.model()?),
        other => bail!("unknown curvature bound `{other}`"),
    })
}

fn supersolution(cfg: &RunConfig, tag: &str) -> Result<Supersolution> {
    let kappa = cfg.kappa.unwrap_or(1.0);
    Ok(match tag {
        "flat" => Supersolution::flat(),
        "hyperbolic" => Supersolution::hyperbolic(kappa),
        "spherical" | "sphere" => Supersolution::spherical(kappa),
        "cigar" => Supersolution::cigar(),
        "power_decay" => Supersolution::power_decay(need(cfg.a, "A")?, need(cfg.eps, "eps")?),
        "inverse_square_claim" => Supersolution::inverse_square_claim(need(cfg.c, "C")?, cfg.big_b.unwrap_or(1.0))?,
        other => bail!("unknown supersolution `{other}`"),
    })
}

pub fn ode(cfg: &RunConfig, echo: Value) -> Result<Outcome> {
    let g = curvature_bound(cfg)?;
    let radii = cfg.radii()?;
    let r_end = match (cfg.r_end, &radii) {
        (Some(r), _) => r,
        (None, Some(v)) => *v.last().unwrap(),
        (None, None) => 20.0,
    };
    let u = solve_riccati_equality(&g, r_end)?;
    let blow_down = u.numeric().and_then(|s| s.blow_down());
    // The solution interval is open; stay clear of a blow-down singularity.
    let end = match blow_down {
        Some(b) => 0.95 * b,
        None => r_end,
    };
    let grid: Vec<f64> = match radii {
        Some(v) => v.into_iter().filter(|&r| r <= end).collect(),
        None => logspace(1e-3, end, 100),
    };
    if grid.is_empty() {
        bail!("no radii inside the solution interval (0, {end}]");
    }
    let h = if blow_down.is_none() {
        Some(solve_convexifier(&u, r_end)?)
    } else {
        None
    };

    let mut csv = String::from("r,u,h,riccati_residual,convexifier_residual\n");
    let mut max_res: f64 = 0.0;
    let mut max_h_res: f64 = 0.0;
    for &r in &grid {
        let uv = u.value(r)?;
        let res = u.residual(&g, r)?;
        max_res = max_res.max(res.abs());
        let (hv, hres) = match &h {
            Some(h) => {
                let hr = h.residual(&u, r)?;
                max_h_res = max_h_res.max(hr.abs());
                (h.value(r)?.to_string(), hr.to_string())
            }
            None => (String::new(), String::new()),
        };
        csv.push_str(&format!("{r},{uv},{hv},{res},{hres}\n"));
    }

    let mut report = RunReport::new("ode", echo, cfg.seed());
    report.push(CheckResult::from_bool(
        "riccati_residual",
        max_res <= RESIDUAL_TOL,
        Some(RESIDUAL_TOL),
        json!({ "max_abs_residual": max_res }),
    ));
    let u_norm = u.normalization_residual()?;
    report.push(CheckResult::from_bool(
        "u_normalization",
        u_norm <= 1e-6,
        Some(1e-6),
        json!({ "residual": u_norm }),
    ));
    if let Some(h) = &h {
        let h_norm = h.normalization_residual()?;
        report.push(CheckResult::from_bool(
            "convexifier_residual",
            max_h_res <= RESIDUAL_TOL,
            Some(RESIDUAL_TOL),
            json!({ "max_abs_residual": max_h_res }),
        ));
        report.push(CheckResult::from_bool(
            "h_normalization",
            h_norm <= 1e-5,
            Some(1e-5),
            json!({ "residual": h_norm }),
        ));
    }
    let mut verified = Value::Null;
    if let Some(tag) = &cfg.verify {
        let s = supersolution(cfg, tag)?;
        let rep = verify_supersolution(&s, &g, &grid)?;
        report.push(
            CheckResult::from_bool(
                "supersolution",
                rep.pass,
                Some(rep.tolerance),
                serde_json::to_value(&rep)?,
            )
            .expecting_violation(cfg.expect_violation.unwrap_or(false)),
        );
        verified = serde_json::to_value(&rep)?;
    }
    report.results = json!({
        "bound": g.tag(),
        "r_end": r_end,
        "blow_down": blow_down,
        "supersolution": verified,
    });
    let headline = match blow_down {
        Some(b) => format!("{}: u blows down at r = {b:.6}", g.tag()),
        None => format!("{}: max Riccati residual {max_res:.2e} on (0, {r_end}]", g.tag()),
    };
    outcome(report, Some(csv), headline)
}

pub fn three_circle(cfg: &RunConfig, echo: Value) -> Result<Outcome> {
    let model = cfg.model()?;
    let f = cfg.function()?;
    let radii = cfg.radii_in(&model)?;
    let h = cfg.convexifier(&model, *radii.last().unwrap())?;
    let tol = cfg.tol(1e-6);
    let curve = growth_curve_seeded(&model, &f, cfg.center()?, &radii, cfg.seed())?;
    let rep = three_circle_check(&curve, &h, tol)?;
    let expect = cfg.expect_violation.unwrap_or(false);
    let mut report = RunReport::new("three-circle", echo, cfg.seed());
    report.push(
        CheckResult::new(
            "three_circle",
            rep.verdict,
            Some(tol),
            json!({ "min_second_difference": rep.min_second_difference, "argmin": rep.argmin, "h": h.tag() }),
        )
        .expecting_violation(expect),
    );
    let csv = curve_csv(&curve, Some(&rep.h_values), Some(&rep.second_differences));
    let headline = format!(
        "{} f = {f}: min second difference {:.3e} at r = {:.4}, verdict {}{}",
        model.name(),
        rep.min_second_difference,
        rep.argmin,
        verdict_word(rep.verdict),
        if expect && rep.verdict == Verdict::Violation {
            " (expected)"
        } else {
            ""
        }
    );
    report.results = serde_json::to_value(&rep)?;
    outcome(report, Some(csv), headline)
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Violation => "violation",
    }
}

pub fn monotonicity(cfg: &RunConfig, echo: Value) -> Result<Outcome> {
    let model = cfg.model()?;
    let f = cfg.function()?;
    let center = cfg.center()?;
    let radii = cfg.radii_in(&model)?;
    let h = cfg.convexifier(&model, *radii.last().unwrap())?;
    let tol = cfg.tol(1e-6);
    let direction = match cfg.direction.as_deref().unwrap_or("nonincreasing") {
        "nonincreasing" => Direction::Nonincreasing,
        "nondecreasing" => Direction::Nondecreasing,
        other => bail!("direction must be nonincreasing or nondecreasing, got `{other}`"),
    };
    let d = match (cfg.d, direction) {
        (Some(d), _) => d,
        (None, Direction::Nonincreasing) => f.degree() as f64,
        (None, Direction::Nondecreasing) if f.n() == 1 => f.vanishing_order_at(center)? as f64,
        (None, Direction::Nondecreasing) => f.vanishing_order() as f64,
    };
    let curve = growth_curve_seeded(&model, &f, center, &radii, cfg.seed())?;
    let rep = monotonicity_check(&curve, &h, d, direction, tol)?;
    let mut report = RunReport::new("monotonicity", echo, cfg.seed());
    report.push(
        CheckResult::new(
            "monotonicity",
            rep.verdict,
            Some(tol),
            json!({ "d": d, "worst_step": rep.worst_step, "worst_at": rep.worst_at, "h": h.tag() }),
        )
        .expecting_violation(cfg.expect_violation.unwrap_or(false)),
    );
    let csv = curve_csv(&curve, Some(&h_values(&h, &radii)?), None);
    let headline = format!(
        "{} f = {f}: log M - {d}·h {}, worst step {:.3e}, verdict {}",
        model.name(),
        serde_json::to_value(direction)?.as_str().unwrap_or_default(),
        rep.worst_step,
        verdict_word(rep.verdict)
    );
    report.results = serde_json::to_value(&rep)?;
    outcome(report, Some(csv), headline)
}

fn h_values(h: &threecircle::comparison::Convexifier, radii: &[f64]) -> Result<Vec<f64>> {
    Ok(radii.iter().map(|&r| h.value(r)).collect::<threecircle::Result<_>>()?)
}

pub fn necessity(cfg: &RunConfig, echo: Value) -> Result<Outcome> {
    let model = cfg.model()?;
    let radii = match cfg.radii()? {
        Some(r) => r,
        None => deficit_grid(&model),
    };
    let tol = cfg.tol(1e-6);
    let rep = necessity_deficit(&model, &radii)?;
    let law_ok = if rep.prediction.abs() < 1e-12 {
        rep.c2.abs() <= 1e-9
    } else {
        ((rep.c2 - rep.prediction) / rep.prediction).abs() <= 0.05
    };
    let mut report = RunReport::new("necessity", echo, cfg.seed());
    report.push(CheckResult::from_bool(
        "deficit_matches_curvature",
        law_ok,
        Some(0.05),
        json!({ "c2": rep.c2, "prediction": rep.prediction }),
    ));
    // M/r = c(1 + c₂r² + ...) is convex in log r to second order iff c₂ ≥ 0.
    report.push(
        CheckResult::from_bool(
            "log_r_convexity_near_origin",
            rep.c2 >= -tol,
            Some(tol),
            json!({ "c2": rep.c2 }),
        )
        .expecting_violation(cfg.expect_violation.unwrap_or(false)),
    );
    let mut e = vec![0; model.n()];
    e[0] = 1;
    let z1 = HoloPoly::monomial(e, num_complex::Complex64::new(1.0, 0.0))?;
    let curve = growth_curve_seeded(&model, &z1, num_complex::Complex64::new(0.0, 0.0), &radii, cfg.seed())?;
    let headline = format!(
        "{}: c2 = {:.6} (curvature prediction {:.6}, condition number {:.2e})",
        model.name(),
        rep.c2,
        rep.prediction,
        rep.condition_number
    );
    report.results = serde_json::to_value(&rep)?;
    outcome(report, Some(curve_csv(&curve, None, None)), headline)
}

pub fn homogeneity(cfg: &RunConfig, echo: Value) -> Result<Outcome> {
    let model = cfg.model()?;
    let f = cfg.function()?;
    let radii = match cfg.radii()? {
        Some(r) => r,
        None => parse_range("100:10000:3", false)?,
    };
    let k = cfg.k.unwrap_or(2.0);
    let rays = cfg.rays.unwrap_or(16);
    let reps = radii
        .iter()
        .map(|&r| homogeneity_check(&model, &f, k, r, rays, cfg.d, cfg.seed()))
        .collect::<threecircle::Result<Vec<_>>>()?;
    let values: Vec<(f64, f64)> = reps.iter().map(|h| (h.r, h.value)).collect();
    let mut report = RunReport::new("homogeneity", echo, cfg.seed());
    let decreasing = values.windows(2).all(|w| w[1].1 < w[0].1);
    report.push(CheckResult::from_bool(
        "homogeneity_decreasing",
        decreasing,
        None,
        json!({ "values": values.iter().map(|v| v.1).collect::<Vec<_>>() }),
    ));
    if let Some(tol) = cfg.tol {
        let worst = values.iter().map(|v| v.1).fold(0.0, f64::max);
        report.push(CheckResult::from_bool(
            "homogeneity_bound",
            worst <= tol,
            Some(tol),
            json!({ "max": worst }),
        ));
    }
    let headline = format!(
        "{} f = {f}, K = {k}: {}",
        model.name(),
        values
            .iter()
            .map(|(r, v)| format!("r={}: {v:.4e}", short(*r)))
            .collect::<Vec<_>>()
            .join(", ")
    );
    report.results = serde_json::to_value(&reps)?;
    outcome(report, Some(samples_csv("homogeneity", &values)), headline)
}

/// `r` rounded to 12 significant digits, so grid roundoff does not show.
fn short(r: f64) -> f64 {
    format!("{r:.11e}").parse().unwrap_or(r)
}

pub fn dimension(cfg: &RunConfig, echo: Value) -> Result<Outcome> {
    let n = u32::try_from(cfg.n())?;
    let d = need(cfg.d, "d")?;
    let regime = cfg.regime.as_deref().unwrap_or("euclidean");
    let (results, headline) = match regime {
        "euclidean" => {
            let bound = dim_poly_space(n, d)?;
            (
                json!({ "bound": bound, "n": n, "d": d }),
                format!("dim O_{d}(C^{n}) = {bound}"),
            )
        }
        "power-decay" => {
            let rep = power_decay_regimes(need(cfg.a, "A")?, need(cfg.eps, "eps")?, d, n)?;
            let clause = serde_json::to_value(rep.clause)?;
            let headline = format!("bound {}, regime {}", rep.bound, clause.as_str().unwrap_or_default());
            (serde_json::to_value(&rep)?, headline)
        }
        "exp-growth" => {
            let (bound, roots) = exp_growth_bound(need(cfg.c, "C")?, d, n, need(cfg.c1, "c1")?)?;
            let headline = format!("bound {}, roots a = {:.5}, b = {:.5}", bound.bound, roots.a, roots.b);
            (json!({ "bound": bound, "roots": roots }), headline)
        }
        "h" => {
            let model = match cfg.model {
                Some(_) => cfg.model()?,
                None => RadialKahlerModel::flat(cfg.n()),
            };
            let window = cfg.window.unwrap_or([10.0, 1e3]);
            let h = cfg.convexifier(&model, window[1] * 1.01)?;
            let bound = dim_bound_from_h(&h, d, n, (window[0], window[1]))?;
            let headline = format!("bound {} (effective order {:.6})", bound.bound, bound.d_eff);
            (serde_json::to_value(&bound)?, headline)
        }
        other => bail!("regime must be euclidean, power-decay, exp-growth or h, got `{other}`"),
    };
    let mut report = RunReport::new("dimension", echo, cfg.seed());
    report.push(CheckResult::from_bool("dimension_bound", true, None, results.clone()));
    report.results = results;
    outcome(report, None, headline)
}

pub fn suite(name: &str, cfg: &RunConfig, echo: Value) -> Result<Outcome> {
    let mut report = run_suite(name, Some(cfg.seed()))?;
    if let Value::Object(mut m) = echo {
        m.insert("suite".into(), json!(name));
        report.config = Value::Object(m);
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    let headline = format!("suite {name}: {passed}/{} checks passed", report.checks.len());
    outcome(report, None, headline)
}
