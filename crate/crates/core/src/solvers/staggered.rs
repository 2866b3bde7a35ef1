use std::time::Instant;

use nalgebra::{DMatrix, DVector, Vector2};

use super::admm::{default_rho, run_admm, AdmmSettings};
use super::{empty_solution, finish, initial_lambda, Outcome};
use crate::config::SolverConfig;
use crate::error::{ContactError, Result};
use crate::problem::ContactProblem;
use crate::residuals::residuals_from_velocity;
use crate::solution::{ContactSolution, SolveTrace};

/// Staggered projections.
///
/// Alternates two convex quadratic programs: the normal impulses over the
/// nonnegative orthant with the tangential impulses frozen, then the
/// tangential impulses over the disks of radius `mu lam_N` with the normal
/// impulses frozen. Each subproblem is solved by ADMM. Stops when the
/// De Saxcé criterion and the outer change both fall below `eps_abs`.
pub fn solve_staggered(problem: &ContactProblem, config: &SolverConfig) -> Result<ContactSolution> {
    let started = Instant::now();
    config.validate()?;
    let nc = problem.num_contacts();
    if nc == 0 {
        return Ok(empty_solution(started));
    }
    let h = problem.effective_delassus();
    let g = problem.free_velocity();
    let normal_idx: Vec<usize> = (0..nc).map(|i| 3 * i).collect();
    let tangent_idx: Vec<usize> = (0..nc).flat_map(|i| [3 * i + 1, 3 * i + 2]).collect();
    let h_nn = submatrix(h, &normal_idx, &normal_idx);
    let h_nt = submatrix(h, &normal_idx, &tangent_idx);
    let h_tt = submatrix(h, &tangent_idx, &tangent_idx);
    let h_tn = h_nt.transpose();
    let g_n = gather(g, &normal_idx);
    let g_t = gather(g, &tangent_idx);
    let inner = |rho: f64| AdmmSettings {
        max_iterations: config.staggered.inner_max_iterations,
        eps: config.eps_abs * config.staggered.inner_eps_ratio,
        rho,
        adaptive: config.adaptive_rho,
        relaxation: None,
        max_recorded_iterates: 0,
    };
    let rho_n = default_rho(&h_nn);
    let rho_t = default_rho(&h_tt);
    let mus = problem.mus();

    let mut lambda = initial_lambda(problem, config)?;
    let mut trace = SolveTrace::default();
    let mut criterion = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    for k in 1..=config.max_iterations {
        let prev = lambda.clone();

        let lam_t = gather(&lambda, &tangent_idx);
        let q_n = &g_n + &h_nt * &lam_t;
        let z0 = gather(&lambda, &normal_idx);
        let dual0 = -(&h_nn * &z0 + &q_n);
        let normal = run_admm(&h_nn, &q_n, |v| v.apply(|x| *x = x.max(0.0)), z0, dual0, &inner(rho_n))
            .map_err(|e| ContactError::Stage { stage: "normal", source: Box::new(e) })?;
        scatter(&mut lambda, &normal_idx, &normal.z);

        let lam_n = normal.z;
        let q_t = &g_t + &h_tn * &lam_n;
        let z0 = gather(&lambda, &tangent_idx);
        let dual0 = -(&h_tt * &z0 + &q_t);
        let disks = |v: &mut DVector<f64>| {
            for i in 0..nc {
                let radius = mus[i] * lam_n[i];
                let t = Vector2::new(v[2 * i], v[2 * i + 1]);
                let norm = t.norm();
                if norm > radius {
                    let scaled = if norm > 0.0 { t * (radius / norm) } else { Vector2::zeros() };
                    v[2 * i] = scaled[0];
                    v[2 * i + 1] = scaled[1];
                }
            }
        };
        let tangential = run_admm(&h_tt, &q_t, disks, z0, dual0, &inner(rho_t))
            .map_err(|e| ContactError::Stage { stage: "tangential", source: Box::new(e) })?;
        scatter(&mut lambda, &tangent_idx, &tangential.z);

        if let Some(a) = config.over_relaxation {
            lambda = &prev * a + &lambda * (1.0 - a);
        }
        iterations = k;
        let change = (&lambda - &prev).amax();
        let c = problem.effective_velocity(&lambda);
        let ncp = residuals_from_velocity(problem, &lambda, &c).ncp_criterion;
        criterion = ncp.max(change);
        trace.record(criterion, &lambda, config.max_recorded_iterates);
        if ncp <= config.eps_abs && change <= config.eps_abs {
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

fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

fn gather(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&k| v[k]))
}

fn scatter(v: &mut DVector<f64>, idx: &[usize], values: &DVector<f64>) {
    for (&k, &x) in idx.iter().zip(values.iter()) {
        v[k] = x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(g: [f64; 3], mu: f64) -> ContactProblem {
        ContactProblem::new(DMatrix::identity(3, 3), DVector::from_row_slice(&g), &[mu]).unwrap()
    }

    fn cfg() -> SolverConfig {
        SolverConfig::with_tolerance(1e-10, 1000)
    }

    #[test]
    fn sliding_contact_reaches_the_exact_law() {
        let s = solve_staggered(&unit([-1.0, -2.0, 0.0], 0.5), &cfg()).unwrap();
        assert!(s.converged);
        assert!((s.lambda - DVector::from_row_slice(&[1.0, 0.5, 0.0])).amax() < 1e-8);
    }

    #[test]
    fn sticking_and_separating_contacts() {
        let stick = solve_staggered(&unit([-1.0, 0.2, 0.0], 0.5), &cfg()).unwrap();
        assert!((stick.lambda - DVector::from_row_slice(&[1.0, -0.2, 0.0])).amax() < 1e-8);
        let off = solve_staggered(&unit([1.0, 0.0, 0.0], 0.5), &cfg()).unwrap();
        assert!(off.lambda.amax() < 1e-10);
    }

    #[test]
    fn inner_failures_name_the_stage() {
        let err = ContactError::Stage { stage: "normal", source: Box::new(ContactError::Factorization { rho: 1.0 }) };
        assert!(err.to_string().contains("normal"));
    }
}
