//! The six contact solvers and their shared machinery.

mod admm;
mod ccp_pgs;
mod lcp_pgs;
mod ncp_pgs;
mod oracle;
mod pgs;
mod raisim;
mod staggered;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DVector, Matrix3, Vector3};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use admm::solve_ccp_admm;
pub use ccp_pgs::solve_ccp_pgs;
pub use lcp_pgs::solve_lcp_pgs;
pub use ncp_pgs::solve_ncp_pgs;
pub use oracle::{analytic_single_contact, enumerate_single_contact, single_contact_problem, DisjunctiveBranch, OracleSolution};
pub use raisim::{bisection_sliding, solve_raisim};
pub use staggered::solve_staggered;

use crate::config::SolverConfig;
use crate::error::{ContactError, Result};
use crate::problem::ContactProblem;
use crate::residuals::{residuals_from_velocity, Residuals};
use crate::solution::{AdmmState, ContactSolution, SolveTrace};

/// The contact model / algorithm pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    LcpPgs,
    CcpPgs,
    CcpAdmm,
    Raisim,
    NcpPgs,
    Staggered,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] = [
        SolverKind::LcpPgs,
        SolverKind::CcpPgs,
        SolverKind::CcpAdmm,
        SolverKind::Raisim,
        SolverKind::NcpPgs,
        SolverKind::Staggered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::LcpPgs => "lcp-pgs",
            SolverKind::CcpPgs => "ccp-pgs",
            SolverKind::CcpAdmm => "ccp-admm",
            SolverKind::Raisim => "raisim",
            SolverKind::NcpPgs => "ncp-pgs",
            SolverKind::Staggered => "staggered",
        }
    }

    pub fn solve(self, problem: &ContactProblem, config: &SolverConfig) -> Result<ContactSolution> {
        match self {
            SolverKind::LcpPgs => solve_lcp_pgs(problem, config),
            SolverKind::CcpPgs => solve_ccp_pgs(problem, config),
            SolverKind::CcpAdmm => solve_ccp_admm(problem, config),
            SolverKind::Raisim => solve_raisim(problem, config),
            SolverKind::NcpPgs => solve_ncp_pgs(problem, config),
            SolverKind::Staggered => solve_staggered(problem, config),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = ContactError;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = SolverKind::ALL.iter().map(|k| k.name()).collect();
                ContactError::InvalidArgument(format!("unknown solver '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// `alpha lam_prev + (1 - alpha) lam_new`.
///
/// `alpha = 0` returns `lam_new`, `alpha = 1` returns `lam_prev`.
pub fn over_relax(lam_prev: &DVector<f64>, lam_new: &DVector<f64>, alpha: f64) -> Result<DVector<f64>> {
    if !(0.0..2.0).contains(&alpha) {
        return Err(ContactError::InvalidArgument(format!("relaxation weight must lie in [0, 2), got {alpha}")));
    }
    if lam_prev.len() != lam_new.len() {
        return Err(ContactError::Dimension { field: "lam_new", expected: lam_prev.len(), actual: lam_new.len() });
    }
    Ok(lam_prev * alpha + lam_new * (1.0 - alpha))
}

#[inline]
pub(crate) fn relax3(prev: &Vector3<f64>, new: Vector3<f64>, alpha: Option<f64>) -> Vector3<f64> {
    match alpha {
        Some(a) => prev * a + new * (1.0 - a),
        None => new,
    }
}

/// `((G + R) lam + g)` restricted to contact `i`.
#[inline]
pub(crate) fn local_velocity(problem: &ContactProblem, lambda: &DVector<f64>, i: usize) -> Vector3<f64> {
    let rows = problem.effective_delassus().fixed_rows::<3>(3 * i);
    rows * lambda + problem.free_velocity_at(i)
}

#[inline]
pub(crate) fn get3(v: &DVector<f64>, i: usize) -> Vector3<f64> {
    Vector3::new(v[3 * i], v[3 * i + 1], v[3 * i + 2])
}

#[inline]
pub(crate) fn set3(v: &mut DVector<f64>, i: usize, x: &Vector3<f64>) {
    v[3 * i] = x[0];
    v[3 * i + 1] = x[1];
    v[3 * i + 2] = x[2];
}

/// Initial impulses: the warm start when present, zero otherwise.
pub(crate) fn initial_lambda(problem: &ContactProblem, config: &SolverConfig) -> Result<DVector<f64>> {
    match &config.warm_start {
        Some(ws) => {
            problem.check_lambda(&ws.lambda).map_err(|_| ContactError::Dimension {
                field: "warm_start",
                expected: problem.dim(),
                actual: ws.lambda.len(),
            })?;
            Ok(ws.lambda.clone())
        }
        None => Ok(DVector::zeros(problem.dim())),
    }
}

/// Contact visiting order of one Gauss-Seidel sweep.
pub(crate) struct SweepOrder {
    order: Vec<usize>,
    rng: Option<ChaCha8Rng>,
}

impl SweepOrder {
    pub(crate) fn new(num_contacts: usize, seed: Option<u64>) -> Self {
        Self { order: (0..num_contacts).collect(), rng: seed.map(ChaCha8Rng::seed_from_u64) }
    }

    pub(crate) fn next(&mut self) -> &[usize] {
        if let Some(rng) = self.rng.as_mut() {
            self.order.shuffle(rng);
        }
        &self.order
    }
}

/// Diagonal entry `(k, k)` of block `i`, rejecting non-positive values.
pub(crate) fn positive_diag(block: &Matrix3<f64>, k: usize, contact: usize) -> Result<f64> {
    let d = block[(k, k)];
    if d > 0.0 && d.is_finite() {
        Ok(d)
    } else {
        Err(ContactError::SingularBlock { contact })
    }
}

pub(crate) struct Outcome {
    pub lambda: DVector<f64>,
    pub stop_criterion: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: SolveTrace,
    pub admm: Option<AdmmState>,
}

pub(crate) fn finish(problem: &ContactProblem, outcome: Outcome, started: Instant) -> ContactSolution {
    let effective = problem.effective_velocity(&outcome.lambda);
    let residuals = residuals_from_velocity(problem, &outcome.lambda, &effective);
    let contact_velocity = problem.contact_velocity(&outcome.lambda);
    ContactSolution {
        lambda: outcome.lambda,
        contact_velocity,
        residuals,
        stop_criterion: outcome.stop_criterion,
        iterations: outcome.iterations,
        converged: outcome.converged,
        solve_time: started.elapsed().as_secs_f64(),
        trace: outcome.trace,
        admm: outcome.admm,
    }
}

pub(crate) fn empty_solution(started: Instant) -> ContactSolution {
    ContactSolution {
        lambda: DVector::zeros(0),
        contact_velocity: DVector::zeros(0),
        residuals: Residuals::default(),
        stop_criterion: 0.0,
        iterations: 0,
        converged: true,
        solve_time: started.elapsed().as_secs_f64(),
        trace: SolveTrace::default(),
        admm: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn over_relax_examples() {
        let prev = DVector::from_row_slice(&[2.0, 0.0, 0.0]);
        let new = DVector::from_row_slice(&[0.0, 1.0, -1.0]);
        assert_eq!(over_relax(&prev, &new, 0.0).unwrap(), new);
        assert_eq!(over_relax(&prev, &new, 1.0).unwrap(), prev);
        let mid = over_relax(&prev, &DVector::zeros(3), 0.5).unwrap();
        assert_eq!(mid, DVector::from_row_slice(&[1.0, 0.0, 0.0]));
        assert!(over_relax(&prev, &new, 2.0).is_err());
        assert!(over_relax(&prev, &new, -0.1).is_err());
    }

    #[test]
    fn solver_names_round_trip() {
        for kind in SolverKind::ALL {
            assert_eq!(kind.name().parse::<SolverKind>().unwrap(), kind);
        }
        assert!("pgs".parse::<SolverKind>().is_err());
    }

    #[test]
    fn seeded_sweep_order_is_a_permutation() {
        let mut order = SweepOrder::new(6, Some(7));
        let mut first = order.next().to_vec();
        first.sort();
        assert_eq!(first, (0..6).collect::<Vec<_>>());
        let mut natural = SweepOrder::new(4, None);
        assert_eq!(natural.next(), &[0, 1, 2, 3]);
    }
}
