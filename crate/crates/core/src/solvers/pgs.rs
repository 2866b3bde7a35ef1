use std::time::Instant;

use nalgebra::{DVector, Vector3};

use super::{empty_solution, finish, get3, initial_lambda, local_velocity, relax3, set3, Outcome, SweepOrder};
use crate::config::SolverConfig;
use crate::error::Result;
use crate::problem::ContactProblem;
use crate::solution::{ContactSolution, SolveTrace};

/// Gauss-Seidel driver shared by the per-contact solvers.
///
/// `update(i, lam_i, c_i)` returns the new impulse of contact `i` given its
/// current impulse and local velocity `c_i = ((G + R) lam + g)_i`. The
/// stopping measure is evaluated once per sweep.
pub(crate) fn run_sweeps<U, C>(
    problem: &ContactProblem,
    config: &SolverConfig,
    mut update: U,
    criterion: C,
) -> Result<ContactSolution>
where
    U: FnMut(usize, &Vector3<f64>, &Vector3<f64>, &mut dyn FnMut(&Vector3<f64>) -> Vector3<f64>) -> Vector3<f64>,
    C: Fn(&DVector<f64>, &DVector<f64>) -> f64,
{
    let started = Instant::now();
    config.validate()?;
    let nc = problem.num_contacts();
    if nc == 0 {
        return Ok(empty_solution(started));
    }
    let mut lambda = initial_lambda(problem, config)?;
    let mut order = SweepOrder::new(nc, config.rng_seed);
    let mut trace = SolveTrace::default();
    let mut outcome_criterion = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    for k in 1..=config.max_iterations {
        for &i in order.next() {
            let prev = get3(&lambda, i);
            let c = local_velocity(problem, &lambda, i);
            let block = problem.block(i, i);
            // local velocity after a trial change of lam_i, without a full matvec
            let mut velocity_at = |trial: &Vector3<f64>| c + block * (trial - prev);
            let next = update(i, &prev, &c, &mut velocity_at);
            let next = relax3(&prev, next, config.over_relaxation);
            set3(&mut lambda, i, &next);
        }
        iterations = k;
        let c = problem.effective_velocity(&lambda);
        outcome_criterion = criterion(&lambda, &c);
        trace.record(outcome_criterion, &lambda, config.max_recorded_iterates);
        if outcome_criterion <= config.eps_abs {
            converged = true;
            break;
        }
    }

    Ok(finish(
        problem,
        Outcome { lambda, stop_criterion: outcome_criterion, iterations, converged, trace, admm: None },
        started,
    ))
}

/// Step sizes `(1 / G_NN, 1 / max(G_T1T1, G_T2T2))` of every diagonal block.
pub(crate) fn diagonal_steps(problem: &ContactProblem) -> Result<Vec<(f64, f64)>> {
    (0..problem.num_contacts())
        .map(|i| {
            let block = problem.block(i, i);
            let normal = super::positive_diag(&block, 0, i)?;
            let t1 = super::positive_diag(&block, 1, i)?;
            let t2 = super::positive_diag(&block, 2, i)?;
            Ok((1.0 / normal, 1.0 / t1.max(t2)))
        })
        .collect()
}
