//! Geodesics of the complex-line metric λ(|z|)²|dz|².
//!
//! Distances are computed by shooting in geodesic polar coordinates
//! (metric dr² + G(r)²dθ²) with θ as the independent variable; the
//! Clairaut constant c = G sin φ fixes the geodesic.

use num_complex::Complex64;

use super::model::RadialKahlerModel;
use crate::error::{LabError, Result};
use crate::numerics::ode::{Dopri5, Termination, Trajectory};

const PI: f64 = std::f64::consts::PI;

/// Outcome of one shot from the start point.
#[derive(Debug, Clone, Copy)]
enum Shot {
    /// Radius and arc length where the ray θ = Δθ is reached.
    Crossing { r: f64, s: f64 },
    /// Left the domain or exceeded the trivial upper bound before crossing.
    Escaped,
}

struct Shooter<'a> {
    model: &'a RadialKahlerModel,
    rp: f64,
    gp: f64,
    dtheta: f64,
    bound: f64,
    solver: Dopri5,
}

impl<'a> Shooter<'a> {
    fn shoot(&self, phi: f64) -> Shot {
        let c = self.gp * phi.sin();
        let m = self.model;
        let r_lim = m.r_max() * (1.0 - 1e-9);
        let rhs = |_t: f64, y: &[f64; 3]| -> [f64; 3] {
            match m.jacobi_field(y[0]) {
                Ok((g, gd)) if g > 0.0 => [y[1] * g * g / c, c * gd / g, g * g / c],
                _ => [f64::NAN; 3],
            }
        };
        let y0 = [self.rp, phi.cos(), 0.0];
        let bound = self.bound;
        let stop = |_t: f64, y: &[f64; 3]| y[2] > bound * (1.0 + 1e-9) || y[0] >= r_lim || y[0] <= 0.0;
        match self.solver.integrate_until(rhs, 0.0, y0, self.dtheta, stop) {
            Ok(traj) => match traj.termination {
                Termination::Completed => {
                    let y = traj.y_end();
                    Shot::Crossing { r: y[0], s: y[2] }
                }
                Termination::Stopped(_) => Shot::Escaped,
            },
            Err(_) => Shot::Escaped,
        }
    }
}

/// Geodesic distance between two points of the complex line.
pub fn geodesic_distance(model: &RadialKahlerModel, p: Complex64, q: Complex64) -> Result<f64> {
    Ok(solve(model, p, q)?.distance)
}

struct Solution {
    distance: f64,
    /// Initial Euclidean direction of the minimizing geodesic at p, if not radial.
    direction: f64,
}

fn solve(model: &RadialKahlerModel, p: Complex64, q: Complex64) -> Result<Solution> {
    let (rho_p, rho_q) = (p.norm(), q.norm());
    let rp = model.distance_from_origin(rho_p)?;
    let rq = model.distance_from_origin(rho_q)?;
    if rho_p == 0.0 || rho_q == 0.0 {
        let dir = if rho_p == 0.0 { q.arg() } else { p.arg() + PI };
        return Ok(Solution {
            distance: rp + rq,
            direction: dir,
        });
    }
    // Signed angle from p to q in (-π, π].
    let signed = (q / p).arg();
    let dtheta = signed.abs();
    let sigma = if signed < 0.0 { -1.0 } else { 1.0 };
    if dtheta < 1e-14 {
        let dir = if rq >= rp { p.arg() } else { p.arg() + PI };
        return Ok(Solution {
            distance: (rp - rq).abs(),
            direction: dir,
        });
    }
    let (gp, _) = model.jacobi_field(rp)?;
    let shooter = Shooter {
        model,
        rp,
        gp,
        dtheta,
        bound: rp + rq,
        solver: Dopri5::with_tolerances(1e-12, 1e-13),
    };
    // F(φ) = r(Δθ) − r_q increases as φ decreases; escapes count as +∞.
    let eval = |phi: f64| -> (Option<f64>, f64) {
        match shooter.shoot(phi) {
            Shot::Crossing { r, s } => (Some(r - rq), s),
            Shot::Escaped => (None, f64::INFINITY),
        }
    };
    let (mut lo, mut hi) = (0.0f64, PI);
    // F(lo) >= 0 (or escaped), F(hi) < 0; endpoints are not evaluated.
    let mut f_lo: Option<f64> = None;
    let mut f_hi: Option<f64> = None;
    let mut best: Option<(f64, f64, f64)> = None; // (|F|, s, φ)
    let mut side = 0i32;
    for _ in 0..200 {
        let phi = match (f_lo, f_hi) {
            (Some(a), Some(b)) if a > 0.0 && b < 0.0 => {
                let x = lo + (hi - lo) * a / (a - b);
                if x > lo && x < hi {
                    x
                } else {
                    0.5 * (lo + hi)
                }
            }
            _ => 0.5 * (lo + hi),
        };
        let (f, s) = eval(phi);
        match f {
            Some(v) => {
                if best.is_none_or(|b| v.abs() < b.0) {
                    best = Some((v.abs(), s, phi));
                }
                if v.abs() <= 1e-13 * rq.max(1.0) {
                    break;
                }
                // Illinois modification: halve the stale endpoint's value
                // when the same side moves twice.
                if v >= 0.0 {
                    lo = phi;
                    f_lo = Some(v);
                    if side == 1 {
                        f_hi = f_hi.map(|b| 0.5 * b);
                    }
                    side = 1;
                } else {
                    hi = phi;
                    f_hi = Some(v);
                    if side == -1 {
                        f_lo = f_lo.map(|a| 0.5 * a);
                    }
                    side = -1;
                }
            }
            None => {
                lo = phi;
                f_lo = None;
                side = 0;
            }
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let (_, s, phi) =
        best.ok_or_else(|| LabError::ShootingFailed(format!("no geodesic from {p} reaches the ray through {q}")))?;
    let mut radial = rp + rq;
    let mut radial_dir = p.arg() + PI;
    // On the sphere the path through the antipode of the origin also counts.
    let conj = model.conjugate_radius();
    if conj.is_finite() && 2.0 * conj - rp - rq < radial {
        radial = 2.0 * conj - rp - rq;
        radial_dir = p.arg();
    }
    Ok(if s < radial {
        Solution {
            distance: s,
            direction: p.arg() + sigma * phi,
        }
    } else {
        Solution {
            distance: radial,
            direction: radial_dir,
        }
    })
}

/// Endpoint of the unit-speed geodesic from `p` in Euclidean direction
/// `angle` after arc length `length`.
pub fn exp_map(model: &RadialKahlerModel, p: Complex64, angle: f64, length: f64) -> Result<Complex64> {
    let path = geodesic_samples(model, p, angle, length, 2)?;
    Ok(*path.last().unwrap())
}

/// Unit-speed geodesic from `p` in Euclidean direction `angle`, integrated
/// up to arc length `length`; components are `[x, y, ξ_x, ξ_y]`.
pub fn geodesic_trajectory(model: &RadialKahlerModel, p: Complex64, angle: f64, length: f64) -> Result<Trajectory<4>> {
    let prof = model.profile();
    let rho_max = prof.rho_max;
    if !(p.norm() < rho_max) {
        return Err(LabError::OutOfDomain {
            what: "rho",
            value: p.norm(),
            lo: 0.0,
            hi: rho_max,
        });
    }
    let l0 = prof.lambda(p.norm());
    let y0 = [p.re, p.im, l0 * angle.cos(), l0 * angle.sin()];
    // Hamiltonian H = |ξ|²/(2λ²) in Euclidean coordinates.
    let rhs = |_t: f64, y: &[f64; 4]| -> [f64; 4] {
        let rho = y[0].hypot(y[1]);
        if rho >= rho_max {
            return [f64::NAN; 4];
        }
        let l = prof.lambda(rho);
        let l2 = l * l;
        let p2 = y[2] * y[2] + y[3] * y[3];
        let k = p2 / l2 * prof.dlambda_over_rho(rho) / l;
        [y[2] / l2, y[3] / l2, k * y[0], k * y[1]]
    };
    Ok(Dopri5::with_tolerances(1e-12, 1e-13).integrate(rhs, 0.0, y0, length)?)
}

/// Points along the geodesic from `p` in direction `angle`, sampled at
/// `samples` equally spaced arc lengths in `[0, length]`.
pub fn geodesic_samples(
    model: &RadialKahlerModel,
    p: Complex64,
    angle: f64,
    length: f64,
    samples: usize,
) -> Result<Vec<Complex64>> {
    let traj = geodesic_trajectory(model, p, angle, length)?;
    let n = samples.max(2);
    Ok((0..n)
        .map(|i| {
            let t = length * i as f64 / (n - 1) as f64;
            let y = traj.eval(t).unwrap_or(traj.y_end());
            Complex64::new(y[0], y[1])
        })
        .collect())
}

/// Minimizing geodesic from `p` to `q` as a polyline, with its length.
pub fn geodesic_path(
    model: &RadialKahlerModel,
    p: Complex64,
    q: Complex64,
    samples: usize,
) -> Result<(f64, Vec<Complex64>)> {
    let sol = solve(model, p, q)?;
    let n = samples.max(2);
    if sol.distance == 0.0 {
        return Ok((0.0, vec![p; n]));
    }
    let radial = model.distance_from_origin(p.norm())? + model.distance_from_origin(q.norm())?;
    if (sol.distance - radial).abs() <= 1e-12 * radial.max(1.0) && q != Complex64::new(0.0, 0.0) {
        // Through the origin: straight segments.
        let mut pts = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 / (n - 1) as f64;
            let s = t * sol.distance;
            let rp = radial - model.distance_from_origin(q.norm())?;
            pts.push(if s <= rp {
                p * (model.rho_of_r(rp - s)? / p.norm().max(f64::MIN_POSITIVE))
            } else {
                q * (model.rho_of_r(s - rp)? / q.norm())
            });
        }
        return Ok((sol.distance, pts));
    }
    let pts = geodesic_samples(model, p, sol.direction, sol.distance, n)?;
    Ok((sol.distance, pts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyperbolic_distance(z: Complex64, w: Complex64) -> f64 {
        let num = 2.0 * (z - w).norm_sqr();
        let den = (1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr());
        (1.0 + num / den).acosh()
    }

    #[test]
    fn flat_distance_is_euclidean() {
        let m = RadialKahlerModel::flat(1);
        let p = Complex64::new(1.0, 0.5);
        let q = Complex64::new(-0.3, 2.0);
        let d = geodesic_distance(&m, p, q).unwrap();
        assert!((d - (p - q).norm()).abs() < 1e-9, "{d}");
    }

    #[test]
    fn hyperbolic_distance_matches_closed_form() {
        let m = RadialKahlerModel::hyperbolic(1.0, 1).unwrap();
        let p = Complex64::new(0.3, 0.1);
        let q = Complex64::new(-0.5, 0.4);
        let d = geodesic_distance(&m, p, q).unwrap();
        assert!((d - hyperbolic_distance(p, q)).abs() < 1e-8);
    }

    #[test]
    fn origin_and_same_ray_shortcuts() {
        let m = RadialKahlerModel::cigar(1);
        let p = Complex64::new(0.0, 0.0);
        let q = Complex64::new(0.0, 2.0);
        assert!((geodesic_distance(&m, p, q).unwrap() - 2.0f64.asinh()).abs() < 1e-14);
        let a = Complex64::new(1.0, 1.0);
        let b = Complex64::new(3.0, 3.0);
        let expect = b.norm().asinh() - a.norm().asinh();
        assert!((geodesic_distance(&m, a, b).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn exp_map_follows_lines_in_flat_space() {
        let m = RadialKahlerModel::flat(1);
        let e = exp_map(&m, Complex64::new(1.0, 0.0), 0.5 * PI, 2.0).unwrap();
        assert!((e - Complex64::new(1.0, 2.0)).norm() < 1e-10);
    }

    #[test]
    fn geodesic_path_ends_at_target() {
        let m = RadialKahlerModel::hyperbolic(1.0, 1).unwrap();
        let p = Complex64::new(0.4, 0.0);
        let q = Complex64::new(0.0, -0.6);
        let (d, pts) = geodesic_path(&m, p, q, 20).unwrap();
        assert!((d - hyperbolic_distance(p, q)).abs() < 1e-8);
        assert!((pts[19] - q).norm() < 1e-6, "{:?}", pts[19]);
    }
}
