use proptest::prelude::*;
use threecircle::comparison::Convexifier;
use threecircle::dimension::{
    dim_bound_from_h, dim_poly_space, exp_growth_bound, exp_growth_roots, power_decay_regimes, Count, PowerDecayClause,
    Regime,
};

fn enumerate(n: usize, d: usize) -> u128 {
    // Odometer over exponent vectors in [0, d]^n, keeping total degree ≤ d.
    let mut e = vec![0usize; n];
    let mut count = 0;
    loop {
        if e.iter().sum::<usize>() <= d {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            e[i] += 1;
            if e[i] <= d {
                break;
            }
            e[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn dim_examples() {
    assert_eq!(dim_poly_space(1, 5.0).unwrap(), Count::Finite(6));
    assert_eq!(dim_poly_space(2, 3.0).unwrap(), Count::Finite(10));
    assert_eq!(dim_poly_space(3, 0.0).unwrap(), Count::Finite(1));
    assert_eq!(dim_poly_space(2, 2.443).unwrap(), Count::Finite(6));
    assert!(dim_poly_space(2, -1.0).is_err());
    assert_eq!(dim_poly_space(200, 1e6).unwrap(), Count::Overflow);
}

#[test]
fn dim_matches_enumeration() {
    for n in 1..=4 {
        for d in 0..=10 {
            assert_eq!(
                dim_poly_space(n as u32, d as f64).unwrap(),
                Count::Finite(enumerate(n, d)),
                "n={n} d={d}"
            );
        }
    }
}

#[test]
fn bound_from_h_examples() {
    let b = dim_bound_from_h(&Convexifier::log(), 3.0, 2, (10.0, 1e3)).unwrap();
    assert_eq!(b.bound, Count::Finite(10));
    assert_eq!(b.d_eff, 3.0);
    assert_eq!(b.regime, Regime::EuclideanExact);

    let h = Convexifier::power_decay(0.05, 0.5).unwrap();
    let b = dim_bound_from_h(&h, 2.0, 2, (1e3, 1e5)).unwrap();
    assert!((b.d_eff - 2.0 * 0.2f64.exp()).abs() < 0.05, "{}", b.d_eff);
    assert_eq!(b.bound, Count::Finite(6));

    let b = dim_bound_from_h(&Convexifier::log_sinh(), 3.0, 1, (5.0, 50.0)).unwrap();
    assert!(matches!(b.regime, Regime::ExpGrowth { .. }));
}

#[test]
fn power_decay_examples() {
    let r = power_decay_regimes(0.05, 0.49, 2.0, 2).unwrap();
    assert!(r.sharp_regime && r.bound == Count::Finite(6) && r.clause == PowerDecayClause::Sharp);
    assert!(r.witness < 3.0 && (r.witness - 2.0 * (0.1f64 / 0.49).exp()).abs() < 1e-12);
    let r = power_decay_regimes(0.05, 0.49, 0.7, 2).unwrap();
    assert!(r.trivial_regime && r.bound == Count::Finite(1));
    let r = power_decay_regimes(1.0, 0.4, 5.0, 3).unwrap();
    assert_eq!(r.clause, PowerDecayClause::General);
    assert_eq!(r.bound, dim_poly_space(3, 5.0 * 5f64.exp()).unwrap());
    assert!(power_decay_regimes(0.05, 0.5, 2.0, 2).is_err());
    let r = power_decay_regimes(0.01, 0.49, 2.5, 2).unwrap();
    assert!(!r.sharp_regime && r.clause == PowerDecayClause::General);
}

#[test]
fn exp_growth_examples() {
    let r = exp_growth_roots(0.18).unwrap();
    assert!((r.a - 0.38229).abs() < 1e-5 && (r.b - 0.11771).abs() < 1e-5);
    assert!((r.big_a - 0.23542).abs() < 1e-5 && (r.k - 0.52915).abs() < 1e-5);
    let r = exp_growth_roots(1e-12).unwrap();
    assert!((r.a - 0.5).abs() < 1e-11 && r.big_a.abs() < 1e-11);
    assert!(exp_growth_roots(0.3).is_err());
    assert!(exp_growth_roots(0.25).is_err());
    let (b, _) = exp_growth_bound(0.18, 4.0, 2, 2.0).unwrap();
    assert_eq!(b.bound, dim_poly_space(2, 2.0).unwrap());
}

proptest! {
    #[test]
    fn roots_solve_the_quadratic(c in 1e-6f64..0.2499) {
        let r = exp_growth_roots(c).unwrap();
        for x in [r.a, r.b] {
            prop_assert!((2.0 * x * x - x + c / 2.0).abs() <= 1e-12);
        }
        prop_assert!(r.a > 0.25 && 0.25 > r.b && r.b > 0.0);
    }

    #[test]
    fn sharp_regime_is_consistent(a in 1e-4f64..0.1, eps in 0.05f64..0.49, d in 1u32..6, n in 1u32..5) {
        let rep = power_decay_regimes(a, eps, d as f64, n).unwrap();
        if rep.sharp_regime && !rep.trivial_regime {
            prop_assert!(rep.witness < d as f64 + 1.0);
            prop_assert!(rep.general_bound.finite().unwrap() >= rep.bound.finite().unwrap());
            prop_assert_eq!(rep.bound, dim_poly_space(n, d as f64).unwrap());
        }
    }

    #[test]
    fn bound_monotone_in_gamma_and_d(a1 in 0.01f64..0.3, da in 0.0f64..0.3, d in 0.5f64..6.0, dd in 0.0f64..3.0, n in 1u32..4) {
        // Larger A means smaller γ = e^{−2A/ε}, so the bound cannot shrink.
        let eps = 0.4;
        let window = (1e4, 1e6);
        let weak = dim_bound_from_h(&Convexifier::power_decay(a1, eps).unwrap(), d, n, window).unwrap();
        let strong = dim_bound_from_h(&Convexifier::power_decay(a1 + da, eps).unwrap(), d, n, window).unwrap();
        prop_assert!(strong.bound.finite() >= weak.bound.finite());
        let more = dim_bound_from_h(&Convexifier::power_decay(a1, eps).unwrap(), d + dd, n, window).unwrap();
        prop_assert!(more.bound.finite() >= weak.bound.finite());
    }
}
