use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use threecircle::metric::{
    builtin_model, exp_map, geodesic_distance, geodesic_path, parse_profile_table, ModelSpec, RadialKahlerModel,
    RadialProfile,
};
use threecircle::numerics::diff;
use threecircle::numerics::linspace;
use threecircle::suite::builtin_models;
use threecircle::LabError;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn builtin_examples() {
    let flat = builtin_model("flat", &BTreeMap::new(), 1).unwrap();
    assert_eq!(flat.distance_from_origin(2.5).unwrap(), 2.5);
    assert_eq!(flat.radial_curvature(1.0).unwrap(), 0.0);

    let cigar = RadialKahlerModel::cigar(1);
    assert!((cigar.rho_of_r(2.0).unwrap() - 2f64.sinh()).abs() < 1e-12);
    assert!((cigar.distance_from_origin(3f64.sinh()).unwrap() - 3.0).abs() < 1e-8);
    assert!((cigar.distance_by_quadrature(3f64.sinh()).unwrap() - 3.0).abs() < 1e-8);

    let sphere = RadialKahlerModel::sphere(1.0, 1).unwrap();
    assert_eq!(sphere.r_max(), std::f64::consts::PI);
    assert!((sphere.rho_of_r(1.0).unwrap() - 0.5f64.tan()).abs() < 1e-12);
    assert!((sphere.distance_by_quadrature(0.7).unwrap() - 2.0 * 0.7f64.atan()).abs() < 1e-10);

    let hyp = RadialKahlerModel::hyperbolic(1.0, 1).unwrap();
    assert!((hyp.distance_from_origin(0.5f64.tanh()).unwrap() - 1.0).abs() < 1e-12);
    assert!(hyp.r_max().is_infinite());
}

#[test]
fn builtin_errors() {
    assert!(matches!(
        builtin_model("torus", &BTreeMap::new(), 1),
        Err(LabError::UnknownTag(_))
    ));
    let mut p = BTreeMap::new();
    p.insert("kappa".to_string(), -1.0);
    assert!(builtin_model("sphere", &p, 1).is_err());
    assert!(RadialProfile::conformal_poly(vec![1.0, -1.0], None).is_err());
    assert!(RadialProfile::table("t", vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 0.0, 1.0, 1.0]).is_err());
    let sphere = RadialKahlerModel::sphere(1.0, 1).unwrap();
    assert!(sphere.rho_of_r(4.0).is_err());
}

#[test]
fn curvature_examples() {
    let hyp = RadialKahlerModel::hyperbolic(1.0, 1).unwrap();
    assert!((hyp.radial_curvature(0.7).unwrap() + 1.0).abs() < 1e-8);
    let cigar = RadialKahlerModel::cigar(1);
    assert!((cigar.radial_curvature(1.0).unwrap() - 0.83995).abs() < 1e-5);
    let poly = RadialKahlerModel::new(RadialProfile::conformal_poly(vec![1.0, 1.0], None).unwrap(), 1).unwrap();
    // K = −4/(1+ρ²)⁴ for λ = 1 + ρ².
    assert!((poly.radial_curvature(1e-9).unwrap() + 4.0).abs() < 1e-6);
    let rho = 0.8;
    let r = poly.distance_from_origin(rho).unwrap();
    assert!((poly.radial_curvature(r).unwrap() + 4.0 / (1.0 + rho * rho).powi(4)).abs() < 1e-9);
}

#[test]
fn hessian_examples() {
    assert_eq!(RadialKahlerModel::flat(1).model_hessian(4.0).unwrap(), 0.125);
    let cigar = RadialKahlerModel::cigar(1);
    assert!((cigar.model_hessian(1.0).unwrap() - 0.27573).abs() < 1e-5);
    let sphere = RadialKahlerModel::sphere(1.0, 1).unwrap();
    assert!(matches!(
        sphere.model_hessian(std::f64::consts::PI),
        Err(LabError::ConjugatePoint { .. }) | Err(LabError::OutOfDomain { .. })
    ));
}

#[test]
fn round_trip_all_builtins() {
    for model in builtin_models(1) {
        let rho_hi = if model.rho_max().is_finite() {
            0.999 * model.rho_max()
        } else {
            50.0
        };
        for rho in linspace(0.0, rho_hi, 1000) {
            let r = model.distance_from_origin(rho).unwrap();
            let back = model.rho_of_r(r).unwrap();
            assert!(
                (back - rho).abs() <= 1e-10 * (1.0 + rho),
                "{} rho={rho} back={back}",
                model.name()
            );
        }
    }
}

#[test]
fn distance_is_strictly_increasing() {
    for model in builtin_models(1) {
        let rho_hi = if model.rho_max().is_finite() {
            0.99 * model.rho_max()
        } else {
            20.0
        };
        let r: Vec<f64> = linspace(0.0, rho_hi, 200)
            .into_iter()
            .map(|p| model.distance_from_origin(p).unwrap())
            .collect();
        assert!(r[0] == 0.0 && r.windows(2).all(|w| w[1] > w[0]), "{}", model.name());
    }
}

#[test]
fn numeric_curvature_matches_closed_forms() {
    for model in builtin_models(1).into_iter().take(4) {
        let hi = 5.0f64.min(model.r_max() - 0.05);
        for r in linspace(0.05, hi, 40) {
            let exact = model.radial_curvature(r).unwrap();
            let numeric = model.radial_curvature_numeric(r).unwrap();
            assert!(
                (exact - numeric).abs() < 1e-6,
                "{} r={r}: {exact} vs {numeric}",
                model.name()
            );
        }
    }
}

#[test]
fn jacobi_identity_holds() {
    // u = G'/(2G) satisfies u' + 2u² + K/2 = 0.
    for model in builtin_models(1) {
        let hi = 5.0f64.min(model.r_max() - 0.05);
        for r in linspace(0.05, hi, 40) {
            let du = diff::first(|x| model.model_hessian(x).unwrap(), r, 0.01);
            let u = model.model_hessian(r).unwrap();
            let res = du.value + 2.0 * u * u + 0.5 * model.radial_curvature(r).unwrap();
            assert!(res.abs() <= 1e-7, "{} r={r} residual={res}", model.name());
        }
    }
}

#[test]
fn table_profile_tracks_its_source() {
    let rho: Vec<f64> = linspace(0.0, 3.0, 301);
    let lambda: Vec<f64> = rho.iter().map(|p| 2.0 / (1.0 + p * p)).collect();
    let mut text = String::from("# rho lambda\n");
    for (p, l) in rho.iter().zip(&lambda) {
        text.push_str(&format!("{p} {l}\n"));
    }
    let (rho, lambda) = parse_profile_table(&text).unwrap();
    let model = ModelSpec::Table { rho, lambda }.build(1).unwrap();
    let sphere = RadialKahlerModel::sphere(1.0, 1).unwrap();
    for p in [0.3, 1.0, 2.5] {
        let a = model.distance_from_origin(p).unwrap();
        let b = sphere.distance_from_origin(p).unwrap();
        assert!((a - b).abs() < 1e-6, "rho={p}: {a} vs {b}");
    }
    assert!((model.radial_curvature(1.0).unwrap() - 1.0).abs() < 1e-3);
    assert!(parse_profile_table("0 1\n1 1\n").is_err());
}

#[test]
fn model_spec_is_strict_json() {
    let spec: ModelSpec = serde_json::from_str(r#"{"tag":"hyperbolic","kappa":4}"#).unwrap();
    let model = spec.build(2).unwrap();
    assert_eq!(model.n(), 2);
    assert!((model.radial_curvature(0.3).unwrap() + 4.0).abs() < 1e-12);
    assert!(serde_json::from_str::<ModelSpec>(r#"{"tag":"flat","kappa":1}"#).is_err());
}

#[test]
fn geodesic_examples() {
    let flat = RadialKahlerModel::flat(1);
    assert!((geodesic_distance(&flat, c(1.0, 0.0), c(0.0, 4.0)).unwrap() - 17f64.sqrt()).abs() < 1e-8);
    let hyp = RadialKahlerModel::hyperbolic(1.0, 1).unwrap();
    assert!((geodesic_distance(&hyp, c(0.3, 0.0), c(-0.3, 0.0)).unwrap() - 1.23808).abs() < 1e-5);
    let sphere = RadialKahlerModel::sphere(1.0, 1).unwrap();
    let d = geodesic_distance(&sphere, c(0.0, 0.0), c(1.0, 0.0)).unwrap();
    assert!((d - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
}

#[test]
fn geodesic_from_origin_matches_radial_distance() {
    let cigar = RadialKahlerModel::cigar(1);
    for q in [c(0.5, 0.2), c(-2.0, 1.0), c(0.0, -7.0)] {
        let d = geodesic_distance(&cigar, c(0.0, 0.0), q).unwrap();
        assert!((d - cigar.distance_from_origin(q.norm()).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn exp_map_and_path_are_consistent() {
    let cigar = RadialKahlerModel::cigar(1);
    let p = c(0.4, -0.3);
    let q = exp_map(&cigar, p, 0.7, 0.9).unwrap();
    assert!((geodesic_distance(&cigar, p, q).unwrap() - 0.9).abs() < 1e-6);
    let (d, path) = geodesic_path(&cigar, p, q, 20).unwrap();
    assert!((d - 0.9).abs() < 1e-6);
    assert!((path[0] - p).norm() < 1e-12 && (path[path.len() - 1] - q).norm() < 1e-6);
}

#[test]
fn metric_axioms_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for model in builtin_models(1) {
        let rho_hi = if model.rho_max().is_finite() {
            0.9 * model.rho_max()
        } else {
            2.0
        };
        let rho_hi = if model.is_bounded() { 2.5 } else { rho_hi };
        let mut point = || {
            Complex64::from_polar(
                rho_hi * rng.gen::<f64>().sqrt(),
                std::f64::consts::TAU * rng.gen::<f64>(),
            )
        };
        for _ in 0..100 {
            let (p, q, w) = (point(), point(), point());
            let pq = geodesic_distance(&model, p, q).unwrap();
            let qp = geodesic_distance(&model, q, p).unwrap();
            assert!((pq - qp).abs() <= 1e-8, "{} asymmetry {}", model.name(), pq - qp);
            let pw = geodesic_distance(&model, p, w).unwrap();
            let wq = geodesic_distance(&model, w, q).unwrap();
            assert!(pq <= pw + wq + 1e-6, "{} triangle {pq} > {pw} + {wq}", model.name());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rho_of_r_inverts_distance(rho in 0.0f64..0.99, kappa in 0.25f64..4.0) {
        let hyp = RadialKahlerModel::hyperbolic(kappa, 1).unwrap();
        let r = hyp.distance_from_origin(rho).unwrap();
        prop_assert!((hyp.rho_of_r(r).unwrap() - rho).abs() <= 1e-10 * (1.0 + rho));
    }

    #[test]
    fn curvature_scales_with_kappa(kappa in 0.25f64..4.0, t in 0.05f64..0.9) {
        let sphere = RadialKahlerModel::sphere(kappa, 1).unwrap();
        let r = t * sphere.r_max();
        prop_assert!((sphere.radial_curvature_numeric(r).unwrap() - kappa).abs() < 1e-6 * kappa.max(1.0));
    }

    #[test]
    fn flat_distance_is_euclidean(a in -5.0f64..5.0, b in -5.0f64..5.0, x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let flat = RadialKahlerModel::flat(1);
        let d = geodesic_distance(&flat, c(a, b), c(x, y)).unwrap();
        prop_assert!((d - (c(a, b) - c(x, y)).norm()).abs() < 1e-8);
    }
}
