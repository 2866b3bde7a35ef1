use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{ContactError, Result};
use crate::problem::ContactProblem;
use crate::residuals::compute_residuals;

/// Angles sampled when bracketing sliding directions.
const DIRECTION_SAMPLES: usize = 720;
const ANGLE_TOL: f64 = 1e-14;
/// Residual below which a candidate counts as a solution, relative to the problem scale.
const ACCEPT_TOL: f64 = 1e-9;

/// Contact mode of a single-contact solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisjunctiveBranch {
    Takeoff,
    Stick,
    Slide,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub lambda: Vector3<f64>,
    pub branch: DisjunctiveBranch,
    /// Exact-law residual of `lambda`.
    pub residual: f64,
}

/// Every solution of a single-contact problem, found by enumerating modes.
///
/// Separation requires `g_N >= 0`. Sticking takes `-G^-1 g` when it lies in
/// the cone. Sliding writes `lam = lam_N (1, mu cos phi, mu sin phi)` with
/// `lam_N` cancelling the normal velocity and searches the angles at which
/// the tangential velocity points against `(cos phi, sin phi)`. Candidates
/// are kept when their residual is below tolerance, so degenerate problems
/// may yield several.
pub fn enumerate_single_contact(problem: &ContactProblem) -> Result<Vec<OracleSolution>> {
    let scale = 1.0 + problem.free_velocity().amax() + problem.delassus().amax();
    Ok(all_candidates(problem)?.into_iter().filter(|c| c.residual <= ACCEPT_TOL * scale).collect())
}

/// The single-contact solution with the smallest residual.
pub fn analytic_single_contact(problem: &ContactProblem) -> Result<OracleSolution> {
    let scale = 1.0 + problem.free_velocity().amax() + problem.delassus().amax();
    let best = all_candidates(problem)?.into_iter().min_by(|x, y| x.residual.total_cmp(&y.residual));
    match best {
        Some(best) if best.residual <= ACCEPT_TOL * scale => Ok(best),
        Some(best) => Err(ContactError::OracleFailure { best_residual: best.residual }),
        None => Err(ContactError::OracleFailure { best_residual: f64::INFINITY }),
    }
}

fn all_candidates(problem: &ContactProblem) -> Result<Vec<OracleSolution>> {
    if problem.num_contacts() != 1 {
        return Err(ContactError::InvalidArgument(format!(
            "the disjunctive oracle takes one contact, got {}",
            problem.num_contacts()
        )));
    }
    let a: Matrix3<f64> = problem.block(0, 0);
    let g = problem.free_velocity_at(0);
    let mu = problem.cone(0).mu;

    let mut raw = Vec::new();
    if g[0] >= 0.0 {
        raw.push((Vector3::zeros(), DisjunctiveBranch::Takeoff));
    }
    if let Some(inv) = a.try_inverse() {
        let lam = -inv * g;
        if problem.cone(0).contains(&lam) {
            raw.push((lam, DisjunctiveBranch::Stick));
        }
    }
    if mu == 0.0 {
        if a[(0, 0)] > 0.0 && g[0] < 0.0 {
            raw.push((Vector3::new(-g[0] / a[(0, 0)], 0.0, 0.0), DisjunctiveBranch::Slide));
        }
    } else {
        raw.extend(sliding_candidates(&a, &g, mu).into_iter().map(|lam| (lam, DisjunctiveBranch::Slide)));
    }

    raw.into_iter()
        .map(|(lambda, branch)| Ok(OracleSolution { lambda, branch, residual: residual_of(problem, &lambda)? }))
        .collect()
}

fn residual_of(problem: &ContactProblem, lam: &Vector3<f64>) -> Result<f64> {
    Ok(compute_residuals(problem, &DVector::from_column_slice(lam.as_slice()))?.ncp_criterion)
}

fn sliding_candidates(a: &Matrix3<f64>, g: &Vector3<f64>, mu: f64) -> Vec<Vector3<f64>> {
    let impulse = |phi: f64| -> Option<Vector3<f64>> {
        let w = Vector3::new(1.0, mu * phi.cos(), mu * phi.sin());
        let d = a[(0, 0)] * w[0] + a[(0, 1)] * w[1] + a[(0, 2)] * w[2];
        let lam_n = -g[0] / d;
        (d != 0.0 && lam_n > 0.0 && lam_n.is_finite()).then(|| w * lam_n)
    };
    let tangent_velocity = |lam: &Vector3<f64>| {
        let c = a * lam + g;
        Vector2::new(c[1], c[2])
    };
    let misalignment = |phi: f64| {
        impulse(phi).map(|lam| {
            let ct = tangent_velocity(&lam);
            ct[0] * phi.sin() - ct[1] * phi.cos()
        })
    };

    let mut out = Vec::new();
    let step = TAU / DIRECTION_SAMPLES as f64;
    for k in 0..DIRECTION_SAMPLES {
        let (mut lo, mut hi) = (k as f64 * step, (k + 1) as f64 * step);
        let (Some(mut f_lo), Some(f_hi)) = (misalignment(lo), misalignment(hi)) else { continue };
        if f_lo == 0.0 {
            hi = lo;
        } else if f_hi != 0.0 && f_lo.signum() == f_hi.signum() {
            continue;
        } else if f_hi == 0.0 {
            lo = hi;
        }
        while hi - lo > ANGLE_TOL {
            let mid = 0.5 * (lo + hi);
            let Some(f_mid) = misalignment(mid) else { break };
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        let phi = 0.5 * (lo + hi);
        if let Some(lam) = impulse(phi) {
            let ct = tangent_velocity(&lam);
            if ct[0] * phi.cos() + ct[1] * phi.sin() < 0.0 {
                out.push(lam);
            }
        }
    }
    out
}

/// Single-contact problem from a 3x3 Delassus block.
pub fn single_contact_problem(a: Matrix3<f64>, g: Vector3<f64>, mu: f64) -> Result<ContactProblem> {
    ContactProblem::new(
        DMatrix::from_column_slice(3, 3, a.as_slice()),
        DVector::from_column_slice(g.as_slice()),
        &[mu],
    )
}
