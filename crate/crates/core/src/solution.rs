use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::residuals::Residuals;

/// Branch decisions taken by the per-contact bisection solver.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchCounts {
    pub takeoff: usize,
    pub stiction: usize,
    pub sliding: usize,
}

impl std::ops::AddAssign for BranchCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.takeoff += rhs.takeoff;
        self.stiction += rhs.stiction;
        self.sliding += rhs.sliding;
    }
}

/// Per-iteration history of a solve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    /// Stopping measure after each iteration.
    pub criterion: Vec<f64>,
    /// ADMM primal gap `|lam - z|_inf` after each iteration (empty for other solvers).
    pub primal_gap: Vec<f64>,
    /// Leading iterates, bounded by `SolverConfig::max_recorded_iterates`.
    pub iterates: Vec<Vec<f64>>,
    pub branches: BranchCounts,
}

impl SolveTrace {
    pub(crate) fn record(&mut self, criterion: f64, lambda: &DVector<f64>, max_iterates: usize) {
        self.criterion.push(criterion);
        if self.iterates.len() < max_iterates {
            self.iterates.push(lambda.iter().copied().collect());
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}

/// Final ADMM state, reusable as a warm start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmState {
    pub rho: f64,
    pub dual: DVector<f64>,
}

/// Result of a contact solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactSolution {
    pub lambda: DVector<f64>,
    /// `c = G lam + g`.
    pub contact_velocity: DVector<f64>,
    /// Residuals of the exact contact law, whatever model the solver targets.
    pub residuals: Residuals,
    /// Final value of the solver's own stopping measure.
    pub stop_criterion: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Wall-clock solve time in seconds.
    pub solve_time: f64,
    pub trace: SolveTrace,
    pub admm: Option<AdmmState>,
}

impl ContactSolution {
    pub fn num_contacts(&self) -> usize {
        self.lambda.len() / 3
    }
}
