use proptest::prelude::*;
use threecircle::comparison::{
    closed_form_convexifier, growth_exponent, solve_convexifier, solve_riccati_equality, verify_supersolution,
    Convexifier, CurvatureBound, GrowthExponent, Supersolution,
};
use threecircle::numerics::{linspace, logspace};
use threecircle::suite::builtin_models;
use threecircle::LabError;

#[test]
fn riccati_examples() {
    let u = solve_riccati_equality(&CurvatureBound::Constant(0.0), 50.0).unwrap();
    for r in logspace(1e-3, 50.0, 60) {
        assert!((2.0 * r * u.value(r).unwrap() - 1.0).abs() <= 1e-8);
    }
    let u = solve_riccati_equality(&CurvatureBound::Cigar, 20.0).unwrap();
    for r in logspace(1e-3, 20.0, 60) {
        let exact = 1.0 / (2.0 * r).sinh();
        assert!((u.value(r).unwrap() - exact).abs() <= 1e-8 * exact.max(1.0), "r={r}");
    }
}

#[test]
fn riccati_residual_small_on_catalog_bounds() {
    let bounds = [
        (CurvatureBound::Constant(0.0), 20.0),
        (CurvatureBound::Constant(-1.0), 20.0),
        (CurvatureBound::Constant(1.0), std::f64::consts::PI - 0.1),
        (CurvatureBound::Cigar, 20.0),
        (CurvatureBound::power_decay(0.05, 0.49).unwrap(), 20.0),
        (CurvatureBound::power_decay(1.0, 0.4).unwrap(), 20.0),
        (CurvatureBound::inverse_square(0.18, 2.0).unwrap(), 20.0),
    ];
    for (g, hi) in bounds {
        let u = solve_riccati_equality(&g, hi).unwrap();
        for r in logspace(1e-3, hi, 150) {
            let res = u.residual(&g, r).unwrap();
            assert!(res.abs() <= 1e-8, "{} r={r} residual={res}", g.tag());
        }
        assert!(u.normalization_residual().unwrap() <= 1e-6);
        let h = solve_convexifier(&u, hi).unwrap();
        assert!(h.normalization_residual().unwrap() <= 1e-5);
        for r in logspace(1e-3, hi, 50) {
            assert!(h.derivative(r).unwrap() > 0.0);
            assert!(h.residual(&u, r).unwrap().abs() <= 1e-8, "{} r={r}", g.tag());
        }
    }
}

#[test]
fn blow_down_is_reported() {
    let u = solve_riccati_equality(&CurvatureBound::Constant(4.0), 10.0).unwrap();
    let radius = u.numeric().unwrap().blow_down().unwrap();
    assert!((radius - std::f64::consts::FRAC_PI_2).abs() < 1e-4);
    assert!(matches!(solve_convexifier(&u, 3.0), Err(LabError::BlowDown { .. })));
}

#[test]
fn supersolution_examples() {
    let grid = logspace(1e-3, 50.0, 300);
    let rep = verify_supersolution(&Supersolution::flat(), &CurvatureBound::Constant(0.0), &grid).unwrap();
    assert!(rep.pass && rep.max_abs_residual <= 1e-8);
    let rep = verify_supersolution(
        &Supersolution::power_decay(1.0, 0.4),
        &CurvatureBound::power_decay(1.0, 0.4).unwrap(),
        &grid,
    )
    .unwrap();
    assert!(rep.pass && rep.min_residual >= 0.0);
    let u = Supersolution::inverse_square_claim(0.18, 1.0).unwrap();
    let rep = verify_supersolution(
        &u,
        &CurvatureBound::inverse_square(0.18, 2.0).unwrap(),
        &logspace(2.0, 50.0, 100),
    )
    .unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn power_decay_residual_matches_hand_expansion() {
    // 2A/(r(1+r)^{1+ε}) − A(3/2+ε)/(1+r)^{2+ε} + 2A²/(1+r)^{2+2ε}
    let (a, eps) = (1.0, 0.4);
    let u = Supersolution::power_decay(a, eps);
    let g = CurvatureBound::power_decay(a, eps).unwrap();
    for r in [1e-3, 0.1, 1.0, 7.0, 50.0] {
        let s: f64 = 1.0 + r;
        let hand = 2.0 * a / (r * s.powf(1.0 + eps)) - a * (1.5 + eps) / s.powf(2.0 + eps)
            + 2.0 * a * a / s.powf(2.0 + 2.0 * eps);
        let res = u.residual(&g, r).unwrap();
        assert!(
            (res - hand).abs() <= 1e-9 * hand.abs().max(1.0),
            "r={r}: {res} vs {hand}"
        );
    }
}

#[test]
fn convexifier_examples() {
    let h = closed_form_convexifier("nonneg", &[]).unwrap();
    assert_eq!(h.derivative(3.0).unwrap(), 1.0 / 3.0);
    let h = closed_form_convexifier("lower_bound_minus_one", &[]).unwrap();
    assert!((h.derivative(2.0).unwrap() - 0.27573).abs() < 1e-5);
    assert!((h.normalized(1.0).unwrap() - (2.0 * 0.5f64.tanh()).ln()).abs() < 1e-14);
    let u = Supersolution::cigar();
    let h = solve_convexifier(&u, 10.0).unwrap();
    for r in [0.1, 1.0, 5.0] {
        assert!((h.value(r).unwrap() - r.sinh().ln()).abs() < 1e-7);
    }
    assert!(matches!(
        closed_form_convexifier("nope", &[]),
        Err(LabError::UnknownTag(_))
    ));
}

#[test]
fn power_decay_growth_exponent() {
    let h = closed_form_convexifier("power_decay", &[("A", 0.05), ("eps", 0.5)]).unwrap();
    let gamma = growth_exponent(&h, 1e3, 1e5).unwrap().finite().unwrap();
    assert!((gamma / (-0.2f64).exp() - 1.0).abs() < 0.02, "{gamma}");
    let grid = logspace(10.0, 1e6, 30);
    let drift: Vec<f64> = grid
        .iter()
        .map(|&r| h.value(r).unwrap() - (-0.2f64).exp() * r.ln())
        .collect();
    assert!(drift.windows(2).all(|w| (w[1] - w[0]).abs() < 0.5));
    assert_eq!(
        growth_exponent(&Convexifier::log(), 2.0, 200.0).unwrap(),
        GrowthExponent::Finite(1.0)
    );
    assert_eq!(
        growth_exponent(&Convexifier::log_sinh(), 5.0, 50.0).unwrap(),
        GrowthExponent::Superlogarithmic
    );
    assert!(matches!(
        growth_exponent(&Convexifier::log(), 5.0, 20.0),
        Err(LabError::WindowTooNarrow { .. })
    ));
}

#[test]
fn comparison_direction_on_builtins() {
    // Any g below the model curvature gives u_g above the model Hessian.
    for model in builtin_models(1) {
        let hi = 5.0f64.min(model.r_max() - 0.05);
        for shift in [0.0, 0.1, 0.75] {
            let m = model.clone();
            let g = CurvatureBound::custom("shifted", move |r| m.radial_curvature(r).unwrap() - shift);
            let u = solve_riccati_equality(&g, hi).unwrap();
            for r in linspace(0.05, hi, 40) {
                let uh = model.model_hessian(r).unwrap();
                assert!(uh <= u.value(r).unwrap() + 1e-7, "{} shift={shift} r={r}", model.name());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monotone_dependence_on_bound(c1 in -2.0f64..0.5, delta in 0.0f64..1.0, r in 0.01f64..2.0) {
        let c2 = c1 + delta;
        let u1 = solve_riccati_equality(&CurvatureBound::Constant(c1), 2.5).unwrap();
        let u2 = solve_riccati_equality(&CurvatureBound::Constant(c2), 2.5).unwrap();
        prop_assert!(u1.value(r).unwrap() >= u2.value(r).unwrap() - 1e-8);
    }

    #[test]
    fn constant_bound_matches_closed_form(kappa in 0.1f64..3.0, t in 0.01f64..0.95) {
        let r = t * std::f64::consts::PI / kappa.sqrt();
        let pos = solve_riccati_equality(&CurvatureBound::Constant(kappa), r).unwrap();
        let exact = Supersolution::spherical(kappa).value(r).unwrap();
        prop_assert!((pos.value(r).unwrap() - exact).abs() <= 1e-7 * exact.abs().max(1.0));
        let neg = solve_riccati_equality(&CurvatureBound::Constant(-kappa), r).unwrap();
        let exact = Supersolution::hyperbolic(kappa).value(r).unwrap();
        prop_assert!((neg.value(r).unwrap() - exact).abs() <= 1e-7 * exact.max(1.0));
    }

    #[test]
    fn numeric_convexifier_is_increasing(a in 0.01f64..2.0, eps in 0.05f64..0.49) {
        let g = CurvatureBound::power_decay(a, eps).unwrap();
        let u = solve_riccati_equality(&g, 30.0).unwrap();
        let h = solve_convexifier(&u, 30.0).unwrap();
        let values: Vec<f64> = logspace(1e-3, 30.0, 40).into_iter().map(|r| h.value(r).unwrap()).collect();
        prop_assert!(values.windows(2).all(|w| w[1] > w[0]));
    }
}
