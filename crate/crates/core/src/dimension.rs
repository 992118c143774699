//! Dimension counts for spaces of holomorphic functions of bounded growth.

use serde::Serialize;

use crate::comparison::{growth_exponent, ConvexKind, Convexifier, GrowthExponent};
use crate::error::{invalid, LabError, Result};
use crate::numerics::{logspace, ls_slope};

/// A dimension count that may exceed `u128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Count {
    Finite(u128),
    Overflow,
}

impl Count {
    pub fn finite(self) -> Option<u128> {
        match self {
            Count::Finite(v) => Some(v),
            Count::Overflow => None,
        }
    }
}

impl std::fmt::Display for Count {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Count::Finite(v) => write!(f, "{v}"),
            Count::Overflow => f.write_str("overflow"),
        }
    }
}

/// Number of monomials of total degree ≤ ⌊d⌋ in n variables, C(n + ⌊d⌋, n).
pub fn dim_poly_space(n: u32, d: f64) -> Result<Count> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if !(d >= 0.0) {
        return Err(invalid("d", "must be nonnegative"));
    }
    if !d.is_finite() || d.floor() > u64::MAX as f64 {
        return Ok(Count::Overflow);
    }
    let m = d.floor() as u128;
    // C(m + i, i) = C(m + i − 1, i − 1)·(m + i)/i stays integral at every step.
    let mut acc: u128 = 1;
    for i in 1..=n as u128 {
        let Some(top) = m.checked_add(i) else {
            return Ok(Count::Overflow);
        };
        let g = gcd(top, i);
        let (top, den) = (top / g, i / g);
        // acc is divisible by den since the product is an integer and gcd(top, den) = 1.
        acc = match (acc / den).checked_mul(top) {
            Some(v) => v,
            None => return Ok(Count::Overflow),
        };
    }
    Ok(Count::Finite(acc))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum Regime {
    EuclideanExact,
    HGrowth {
        gamma: f64,
    },
    PowerDecay {
        a: f64,
        eps: f64,
        clause: PowerDecayClause,
    },
    ExpGrowth {
        /// Curvature constant C, when the bound came from the inverse-square family.
        c: Option<f64>,
        /// Exponent of the power-law growth of h.
        exponent: f64,
        c1: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerDecayClause {
    Trivial,
    Sharp,
    General,
}

/// Upper bound on the dimension of a growth space with its derivation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionBound {
    pub n: u32,
    pub d: f64,
    pub bound: Count,
    pub regime: Regime,
    /// Euclidean order whose polynomial space dimension is the bound.
    pub d_eff: f64,
}

/// Bound from the vanishing-order argument: a function vanishing to order k
/// at the origin grows at least like e^{k h}, so k ≤ d/γ when h ≥ γ log r.
///
/// `window` is the radius range used to measure γ. Superlogarithmic h is
/// fitted as h ≈ c₁ r^A and yields the exponential-class bound dim(n, d/c₁).
pub fn dim_bound_from_h(h: &Convexifier, d: f64, n: u32, window: (f64, f64)) -> Result<DimensionBound> {
    if !(d >= 0.0) {
        return Err(invalid("d", "must be nonnegative"));
    }
    match growth_exponent(h, window.0, window.1)? {
        GrowthExponent::Finite(gamma) => {
            if !(gamma > 0.0) {
                return Err(LabError::UnstableFit(format!(
                    "growth exponent {gamma} is not positive"
                )));
            }
            let exact = matches!(h.kind, ConvexKind::Log);
            let d_eff = if exact { d } else { d / gamma };
            Ok(DimensionBound {
                n,
                d,
                bound: dim_poly_space(n, d_eff)?,
                regime: if exact {
                    Regime::EuclideanExact
                } else {
                    Regime::HGrowth { gamma }
                },
                d_eff,
            })
        }
        GrowthExponent::Superlogarithmic => {
            let grid = logspace(window.0, window.1, 41);
            let hv = grid.iter().map(|&r| h.value(r)).collect::<Result<Vec<f64>>>()?;
            if hv.iter().any(|v| !(*v > 0.0)) {
                return Err(LabError::UnstableFit("h must be positive on the window".into()));
            }
            let x: Vec<f64> = grid.iter().map(|r| r.ln()).collect();
            let y: Vec<f64> = hv.iter().map(|v| v.ln()).collect();
            let exponent = ls_slope(&x, &y);
            // Smallest c₁ with h ≥ c₁ r^A on the window keeps the bound conservative.
            let c1 = grid
                .iter()
                .zip(&hv)
                .map(|(r, v)| v / r.powf(exponent))
                .fold(f64::INFINITY, f64::min);
            if !(c1 > 0.0) || !exponent.is_finite() {
                return Err(LabError::UnstableFit("power-law fit of h failed".into()));
            }
            let d_eff = d / c1;
            Ok(DimensionBound {
                n,
                d,
                bound: dim_poly_space(n, d_eff)?,
                regime: Regime::ExpGrowth { c: None, exponent, c1 },
                d_eff,
            })
        }
    }
}

/// Which clauses of the power-decay dimension theorem apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerDecayReport {
    pub a: f64,
    pub eps: f64,
    pub d: f64,
    pub n: u32,
    pub trivial_regime: bool,
    pub sharp_regime: bool,
    /// e^{2A/ε}·d, which must stay below ⌊d⌋ + 1 in the sharp regime.
    pub witness: f64,
    pub general_bound: Count,
    pub bound: Count,
    pub clause: PowerDecayClause,
}

/// Dimension bounds for curvature bounded below by −A/(1+r)^{2+ε}.
pub fn power_decay_regimes(a: f64, eps: f64, d: f64, n: u32) -> Result<PowerDecayReport> {
    if !(a > 0.0) || !(eps > 0.0) || !(d > 0.0) {
        return Err(invalid("power_decay", "need A, eps, d > 0"));
    }
    if eps >= 0.5 {
        return Err(invalid("eps", "the power-decay bounds require eps < 1/2"));
    }
    let ratio = a / eps;
    let witness = (2.0 * ratio).exp() * d;
    let general_bound = dim_poly_space(n, witness)?;
    let trivial_regime = d <= (-3.0 * ratio).exp();
    let sharp_regime = d.fract() == 0.0 && ratio <= 1.0 / (4.0 * d);
    let (bound, clause) = if trivial_regime {
        (Count::Finite(1), PowerDecayClause::Trivial)
    } else if sharp_regime {
        debug_assert!(witness < d.floor() + 1.0);
        (dim_poly_space(n, d)?, PowerDecayClause::Sharp)
    } else {
        (general_bound, PowerDecayClause::General)
    };
    Ok(PowerDecayReport {
        a,
        eps,
        d,
        n,
        trivial_regime,
        sharp_regime,
        witness,
        general_bound,
        bound,
        clause,
    })
}

/// Roots a > 1/4 > b of 2x² − x + C/2 = 0 and the derived exponents
/// A = 1 − 2a (growth of h) and k = 2a − 2b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpGrowthRoots {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub big_a: f64,
    pub k: f64,
}

pub fn exp_growth_roots(c: f64) -> Result<ExpGrowthRoots> {
    if !(c > 0.0 && c < 0.25) {
        return Err(invalid("C", format!("must lie in (0, 1/4), got {c}")));
    }
    let a = (1.0 + (1.0 - 4.0 * c).sqrt()) / 4.0;
    // Product of the roots is C/4; avoids cancellation in the small root.
    let b = c / (4.0 * a);
    Ok(ExpGrowthRoots {
        c,
        a,
        b,
        big_a: 1.0 - 2.0 * a,
        k: 2.0 * a - 2.0 * b,
    })
}

/// Bound for functions with |f| ≤ C' e^{d r^A} when h ≥ c₁ r^A + const.
pub fn exp_growth_bound(c: f64, d: f64, n: u32, c1: f64) -> Result<(DimensionBound, ExpGrowthRoots)> {
    let roots = exp_growth_roots(c)?;
    if !(d >= 1.0) {
        return Err(invalid("d", "must be at least 1"));
    }
    if !(c1 > 0.0) {
        return Err(invalid("c1", "must be positive"));
    }
    let d_eff = d / c1;
    Ok((
        DimensionBound {
            n,
            d,
            bound: dim_poly_space(n, d_eff)?,
            regime: Regime::ExpGrowth {
                c: Some(c),
                exponent: roots.big_a,
                c1,
            },
            d_eff,
        },
        roots,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials() {
        assert_eq!(dim_poly_space(1, 5.0).unwrap(), Count::Finite(6));
        assert_eq!(dim_poly_space(2, 3.0).unwrap(), Count::Finite(10));
        assert_eq!(dim_poly_space(3, 0.0).unwrap(), Count::Finite(1));
        assert_eq!(dim_poly_space(2, 2.443).unwrap(), Count::Finite(6));
        assert!(dim_poly_space(2, -1.0).is_err());
    }

    #[test]
    fn huge_binomial_overflows() {
        assert_eq!(dim_poly_space(60, 1e12).unwrap(), Count::Overflow);
        assert_eq!(dim_poly_space(2, f64::INFINITY).unwrap(), Count::Overflow);
        // C(128, 64) fits in u128.
        assert_eq!(
            dim_poly_space(64, 64.0).unwrap(),
            Count::Finite(23_951_146_041_928_082_866_135_587_776_380_551_750)
        );
    }

    #[test]
    fn regime_examples() {
        let r = power_decay_regimes(0.05, 0.49, 2.0, 2).unwrap();
        assert_eq!(r.clause, PowerDecayClause::Sharp);
        assert_eq!(r.bound, Count::Finite(6));
        let r = power_decay_regimes(0.05, 0.49, 0.7, 2).unwrap();
        assert_eq!(r.clause, PowerDecayClause::Trivial);
        assert_eq!(r.bound, Count::Finite(1));
        let r = power_decay_regimes(1.0, 0.4, 5.0, 3).unwrap();
        assert_eq!(r.clause, PowerDecayClause::General);
        assert!(r.bound.finite().is_some());
        assert!(power_decay_regimes(0.05, 0.5, 2.0, 2).is_err());
    }

    #[test]
    fn roots_for_c_018() {
        let r = exp_growth_roots(0.18).unwrap();
        assert!((r.a - 0.38229).abs() < 1e-5);
        assert!((r.b - 0.11771).abs() < 1e-5);
        assert!((r.big_a - 0.23542).abs() < 1e-5);
        assert!((r.k - 0.52915).abs() < 1e-5);
        assert!(exp_growth_roots(0.3).is_err());
        assert!(exp_growth_roots(0.25).is_err());
    }

    #[test]
    fn h_growth_bounds() {
        let b = dim_bound_from_h(&Convexifier::log(), 3.0, 2, (10.0, 1e3)).unwrap();
        assert_eq!(b.bound, Count::Finite(10));
        assert_eq!(b.regime, Regime::EuclideanExact);
        let h = Convexifier::power_decay(0.05, 0.5).unwrap();
        let b = dim_bound_from_h(&h, 2.0, 2, (1e3, 1e5)).unwrap();
        assert_eq!(b.bound, Count::Finite(6));
        assert!((b.d_eff - 2.0 * 0.2f64.exp()).abs() < 0.05, "{}", b.d_eff);
        let b = dim_bound_from_h(&Convexifier::log_sinh(), 3.0, 1, (5.0, 50.0)).unwrap();
        assert!(matches!(b.regime, Regime::ExpGrowth { .. }));
    }
}
