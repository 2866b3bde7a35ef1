use nalgebra::Vector2;

use super::pgs::{diagonal_steps, run_sweeps};
use crate::config::SolverConfig;
use crate::error::Result;
use crate::problem::ContactProblem;
use crate::residuals::residuals_from_velocity;
use crate::solution::ContactSolution;

/// Projected Gauss-Seidel on the exact contact law.
///
/// Same sweep as the pyramidal solver but the tangential impulse is scaled
/// back onto the disk of radius `mu lam_N` (horizontal projection), which
/// keeps friction isotropic. Stops on the De Saxcé criterion.
pub fn solve_ncp_pgs(problem: &ContactProblem, config: &SolverConfig) -> Result<ContactSolution> {
    let steps = diagonal_steps(problem)?;
    run_sweeps(
        problem,
        config,
        |i, lam, c, velocity_at| {
            let (step_n, step_t) = steps[i];
            let mut next = *lam;
            next[0] = (lam[0] - step_n * c[0]).max(0.0);
            let c = velocity_at(&next);
            let t = Vector2::new(next[1] - step_t * c[1], next[2] - step_t * c[2]);
            let t = problem.cone(i).project_horizontal(next[0], &t);
            next[1] = t[0];
            next[2] = t[1];
            next
        },
        |lam, c| residuals_from_velocity(problem, lam, c).ncp_criterion,
    )
}
