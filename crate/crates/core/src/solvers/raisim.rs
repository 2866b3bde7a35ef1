use std::f64::consts::TAU;
use std::time::Instant;

use nalgebra::{Matrix3, Vector3};

use super::{empty_solution, finish, get3, initial_lambda, local_velocity, set3, Outcome, SweepOrder};
use crate::cone::FrictionCone;
use crate::config::SolverConfig;
use crate::error::{ContactError, Result};
use crate::problem::ContactProblem;
use crate::solution::{ContactSolution, SolveTrace};

/// Angles sampled on the cone boundary before bracketing stationary points.
const SLIDING_SAMPLES: usize = 64;
const ANGLE_TOL: f64 = 1e-10;

/// Per-contact bisection solver.
///
/// Each contact is solved exactly against the velocity `g~ = c - G_ii lam_i`
/// induced by all other contacts: separation when `g~_N > 0`, sticking when
/// the unconstrained impulse `-G_ii^-1 g~` lies in the cone, and otherwise a
/// boundary search on the angle of the tangential impulse. The result is
/// blended into the current impulse with a decaying damping factor. Stops
/// when both the sweep change and the normal velocity of pressed contacts
/// fall below `eps_abs`.
pub fn solve_raisim(problem: &ContactProblem, config: &SolverConfig) -> Result<ContactSolution> {
    let started = Instant::now();
    config.validate()?;
    let nc = problem.num_contacts();
    if nc == 0 {
        return Ok(empty_solution(started));
    }
    let inverses = (0..nc)
        .map(|i| problem.block(i, i).try_inverse().ok_or(ContactError::SingularBlock { contact: i }))
        .collect::<Result<Vec<_>>>()?;
    let params = config.raisim;
    let mut alpha = params.alpha0;
    let mut lambda = initial_lambda(problem, config)?;
    let mut order = SweepOrder::new(nc, config.rng_seed);
    let mut trace = SolveTrace::default();
    let mut criterion = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    for k in 1..=config.max_iterations {
        let mut change: f64 = 0.0;
        for &i in order.next() {
            let prev = get3(&lambda, i);
            let block = problem.block(i, i);
            let g_tilde = local_velocity(problem, &lambda, i) - block * prev;
            let cone = problem.cone(i);
            let target = if g_tilde[0] > 0.0 {
                trace.branches.takeoff += 1;
                Vector3::zeros()
            } else {
                let unconstrained = -inverses[i] * g_tilde;
                if cone.contains(&unconstrained) {
                    trace.branches.stiction += 1;
                    unconstrained
                } else {
                    trace.branches.sliding += 1;
                    bisection_sliding(&block, &g_tilde, cone, &unconstrained).map_err(|e| match e {
                        ContactError::SlidingSolve { reason, .. } => ContactError::SlidingSolve { contact: i, reason },
                        other => other,
                    })?
                }
            };
            let next = prev * alpha + target * (1.0 - alpha);
            let next = super::relax3(&prev, next, config.over_relaxation);
            change = change.max((next - prev).amax());
            set3(&mut lambda, i, &next);
        }
        alpha = params.gamma * alpha + (1.0 - params.gamma) * params.alpha_min;
        iterations = k;
        let c = problem.effective_velocity(&lambda);
        let penetration = (0..nc)
            .filter(|&i| lambda[3 * i] > 0.0)
            .map(|i| c[3 * i].abs())
            .fold(0.0, f64::max);
        criterion = change.max(penetration);
        trace.record(criterion, &lambda, config.max_recorded_iterates);
        if change <= config.eps_abs && penetration <= config.eps_abs {
            converged = true;
            break;
        }
    }

    Ok(finish(
        problem,
        Outcome { lambda, stop_criterion: criterion, iterations, converged, trace, admm: None },
        started,
    ))
}

/// Impulse on the cone boundary for a sliding contact.
///
/// Parameterizes the boundary by the tangential angle `theta` with the
/// normal impulse chosen so that the normal velocity vanishes,
/// `lam_N = -g_N / (a_NN + mu (a_N1 cos + a_N2 sin))`, and minimizes
/// `1/2 lam'A lam + g'lam` over `theta` by bracketing sign changes of its
/// derivative and bisecting. `lambda_v0` is the unconstrained impulse that
/// was found outside the cone; it only serves as a fallback candidate for
/// the angle.
pub fn bisection_sliding(
    a: &Matrix3<f64>,
    g_tilde: &Vector3<f64>,
    cone: FrictionCone,
    lambda_v0: &Vector3<f64>,
) -> Result<Vector3<f64>> {
    let g_n = g_tilde[0];
    if g_n >= 0.0 {
        return Ok(Vector3::zeros());
    }
    let mu = cone.mu;
    if mu == 0.0 {
        if a[(0, 0)] <= 0.0 {
            return Err(ContactError::SlidingSolve { contact: 0, reason: "non-positive normal entry".into() });
        }
        return Ok(Vector3::new(-g_n / a[(0, 0)], 0.0, 0.0));
    }

    let denom = |theta: f64| a[(0, 0)] + mu * (a[(0, 1)] * theta.cos() + a[(0, 2)] * theta.sin());
    let impulse = |theta: f64| {
        let w = Vector3::new(1.0, mu * theta.cos(), mu * theta.sin());
        w * (-g_n / denom(theta))
    };
    let objective = |lam: &Vector3<f64>| 0.5 * lam.dot(&(a * lam)) + g_tilde.dot(lam);
    let slope = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let d = denom(theta);
        let lam_n = -g_n / d;
        let d_prime = mu * (-a[(0, 1)] * s + a[(0, 2)] * c);
        let lam_n_prime = -lam_n * d_prime / d;
        let lam = Vector3::new(lam_n, mu * lam_n * c, mu * lam_n * s);
        let lam_prime = Vector3::new(lam_n_prime, mu * (lam_n_prime * c - lam_n * s), mu * (lam_n_prime * s + lam_n * c));
        (a * lam + g_tilde).dot(&lam_prime)
    };

    let thetas: Vec<f64> = (0..SLIDING_SAMPLES).map(|k| TAU * k as f64 / SLIDING_SAMPLES as f64).collect();
    let valid: Vec<bool> = thetas.iter().map(|&t| denom(t) > 0.0).collect();
    if !valid.iter().any(|&v| v) {
        return Err(ContactError::SlidingSolve { contact: 0, reason: "no boundary angle keeps the normal impulse positive".into() });
    }

    let mut candidates = Vec::new();
    let t0 = lambda_v0[2].atan2(lambda_v0[1]);
    if denom(t0) > 0.0 {
        candidates.push(t0);
    }
    for k in 0..SLIDING_SAMPLES {
        let next = (k + 1) % SLIDING_SAMPLES;
        if !(valid[k] && valid[next]) {
            continue;
        }
        let lo = thetas[k];
        let hi = if next == 0 { TAU } else { thetas[next] };
        let (s_lo, s_hi) = (slope(lo), slope(hi));
        if s_lo == 0.0 {
            candidates.push(lo);
        }
        if s_lo < 0.0 && s_hi > 0.0 {
            candidates.push(bisect(&slope, lo, hi));
        }
    }
    if candidates.is_empty() {
        candidates.extend(thetas.iter().zip(&valid).filter(|(_, &v)| v).map(|(&t, _)| t));
    }

    candidates
        .into_iter()
        .map(impulse)
        .filter(|lam| lam.iter().all(|x| x.is_finite()))
        .min_by(|x, y| objective(x).total_cmp(&objective(y)))
        .ok_or_else(|| ContactError::SlidingSolve { contact: 0, reason: "no finite boundary candidate".into() })
}

/// Root of an increasing sign change of `f` in `[lo, hi]`.
fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > ANGLE_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use crate::solution::BranchCounts;

    fn unit(g: [f64; 3], mu: f64) -> ContactProblem {
        ContactProblem::new(DMatrix::identity(3, 3), DVector::from_row_slice(&g), &[mu]).unwrap()
    }

    fn cfg() -> SolverConfig {
        SolverConfig::with_tolerance(1e-12, 10_000)
    }

    #[test]
    fn sliding_contact_matches_the_exact_law_for_isotropic_blocks() {
        let s = solve_raisim(&unit([-1.0, -2.0, 0.0], 0.5), &cfg()).unwrap();
        assert!(s.converged);
        assert!((s.lambda - DVector::from_row_slice(&[1.0, 0.5, 0.0])).amax() < 1e-9);
        assert!(s.trace.branches.sliding > 0);
    }

    #[test]
    fn branches_are_counted() {
        let takeoff = solve_raisim(&unit([1.0, 0.0, 0.0], 0.5), &cfg()).unwrap();
        assert_eq!(takeoff.trace.branches, BranchCounts { takeoff: takeoff.iterations, ..Default::default() });
        let stick = solve_raisim(&unit([-1.0, 0.2, 0.0], 0.5), &cfg()).unwrap();
        assert!(stick.trace.branches.stiction > 0);
        assert!((stick.lambda - DVector::from_row_slice(&[1.0, -0.2, 0.0])).amax() < 1e-9);
    }

    #[test]
    fn frictionless_sliding_is_purely_normal() {
        let a = Matrix3::new(2.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 1.0);
        let lam = bisection_sliding(&a, &Vector3::new(-1.0, 3.0, 0.0), FrictionCone::frictionless(), &Vector3::zeros()).unwrap();
        assert_eq!(lam, Vector3::new(0.5, 0.0, 0.0));
    }

    #[test]
    fn sliding_root_satisfies_the_boundary_optimality_condition() {
        let a = Matrix3::new(2.0, 0.3, -0.2, 0.3, 1.5, 0.1, -0.2, 0.1, 0.8);
        let g = Vector3::new(-1.0, 2.0, -1.0);
        let cone = FrictionCone::new(0.4);
        let v0 = -a.try_inverse().unwrap() * g;
        let lam = bisection_sliding(&a, &g, cone, &v0).unwrap();
        let c = a * lam + g;
        assert!(c[0].abs() < 1e-10);
        assert!(((lam[1].powi(2) + lam[2].powi(2)).sqrt() - 0.4 * lam[0]).abs() < 1e-12);
        let dir = Vector3::new(0.0, lam[1], lam[2]) + Vector3::new(0.0, a[(0, 1)], a[(0, 2)]) * (0.16 * lam[0] / a[(0, 0)]);
        let cross = c[1] * dir[2] - c[2] * dir[1];
        assert!(cross.abs() < 1e-8, "{cross}");
        assert!(c[1] * dir[1] + c[2] * dir[2] < 0.0);
    }

    #[test]
    fn singular_block_is_reported() {
        let mut g = DMatrix::identity(6, 6);
        g.view_mut((3, 3), (3, 3)).fill(0.0);
        let p = ContactProblem::new(g, DVector::from_element(6, -1.0), &[0.5, 0.5]).unwrap();
        assert_eq!(solve_raisim(&p, &cfg()).unwrap_err(), ContactError::SingularBlock { contact: 1 });
    }
}
