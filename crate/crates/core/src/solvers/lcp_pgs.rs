use nalgebra::Vector2;

use super::pgs::{diagonal_steps, run_sweeps};
use crate::config::SolverConfig;
use crate::error::Result;
use crate::problem::ContactProblem;
use crate::residuals::lcp_criterion_from_velocity;
use crate::solution::ContactSolution;

/// Projected Gauss-Seidel on the pyramidal (four-facet) linearization.
///
/// Each contact update is a normal step clamped at zero followed by a
/// tangential step whose components are clamped to `[-mu lam_N, mu lam_N]`.
/// Stops on [`crate::residuals::lcp_criterion`].
pub fn solve_lcp_pgs(problem: &ContactProblem, config: &SolverConfig) -> Result<ContactSolution> {
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
            let t = problem.cone(i).clamp_pyramid(next[0], &t);
            next[1] = t[0];
            next[2] = t[1];
            next
        },
        |lam, c| lcp_criterion_from_velocity(problem, lam, c),
    )
}
