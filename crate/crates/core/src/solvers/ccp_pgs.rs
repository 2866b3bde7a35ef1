use super::pgs::run_sweeps;
use crate::config::SolverConfig;
use crate::error::{ContactError, Result};
use crate::problem::ContactProblem;
use crate::residuals::ccp_stationarity_from_velocity;
use crate::solution::ContactSolution;

/// Projected Gauss-Seidel on the cone complementarity relaxation.
///
/// Each contact takes a block gradient step of length `3 / trace(G_ii)` on the
/// quadratic objective and is projected back onto its friction cone.
pub fn solve_ccp_pgs(problem: &ContactProblem, config: &SolverConfig) -> Result<ContactSolution> {
    let steps = (0..problem.num_contacts())
        .map(|i| {
            let trace = problem.block(i, i).trace();
            if trace > 0.0 && trace.is_finite() {
                Ok(3.0 / trace)
            } else {
                Err(ContactError::SingularBlock { contact: i })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    run_sweeps(
        problem,
        config,
        |i, lam, c, _| problem.cone(i).project(&(lam - c * steps[i])),
        |lam, c| ccp_stationarity_from_velocity(problem, lam, c),
    )
}
