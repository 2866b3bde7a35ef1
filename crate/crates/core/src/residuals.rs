//! Solver-agnostic accuracy measures.
//!
//! [`compute_residuals`] evaluates the De Saxcé complementarity residuals of
//! the exact contact law. It is what every solver reports and what the
//! benchmark uses to judge physical accuracy. The model-specific stopping
//! measures ([`ccp_stationarity`], [`lcp_criterion`]) live here too.

use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::cone::{de_saxce_correction, tangential};
use crate::error::Result;
use crate::problem::ContactProblem;

/// Per-contact primal, dual and complementarity residuals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub complementarity: Vec<f64>,
    pub ncp_criterion: f64,
}

impl Residuals {
    pub fn num_contacts(&self) -> usize {
        self.primal.len()
    }

    /// Largest of the three residuals at contact `i`.
    pub fn contact_max(&self, i: usize) -> f64 {
        self.primal[i].max(self.dual[i]).max(self.complementarity[i])
    }
}

/// Residuals of `lambda` against the exact (De Saxcé) contact law.
pub fn compute_residuals(problem: &ContactProblem, lambda: &DVector<f64>) -> Result<Residuals> {
    problem.check_lambda(lambda)?;
    let c = problem.effective_velocity(lambda);
    Ok(residuals_from_velocity(problem, lambda, &c))
}

pub(crate) fn residuals_from_velocity(problem: &ContactProblem, lambda: &DVector<f64>, c: &DVector<f64>) -> Residuals {
    let nc = problem.num_contacts();
    let mut out = Residuals {
        primal: Vec::with_capacity(nc),
        dual: Vec::with_capacity(nc),
        complementarity: Vec::with_capacity(nc),
        ncp_criterion: 0.0,
    };
    for (i, cone) in problem.cones().iter().enumerate() {
        let lam = block(lambda, i);
        let ci = block(c, i);
        let shifted = ci + de_saxce_correction(&ci, cone.mu);
        let p = cone.distance(&lam);
        let d = cone.dual_distance(&shifted);
        let comp = lam.dot(&shifted).abs();
        out.ncp_criterion = out.ncp_criterion.max(p).max(d).max(comp);
        out.primal.push(p);
        out.dual.push(d);
        out.complementarity.push(comp);
    }
    out
}

/// Fixed-point residual of the cone complementarity relaxation,
/// `|lam - proj_K(lam - ((G + R) lam + g))|_inf`.
pub fn ccp_stationarity(problem: &ContactProblem, lambda: &DVector<f64>) -> Result<f64> {
    problem.check_lambda(lambda)?;
    let c = problem.effective_velocity(lambda);
    Ok(ccp_stationarity_from_velocity(problem, lambda, &c))
}

pub(crate) fn ccp_stationarity_from_velocity(problem: &ContactProblem, lambda: &DVector<f64>, c: &DVector<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for (i, cone) in problem.cones().iter().enumerate() {
        let lam = block(lambda, i);
        let step = cone.project(&(lam - block(c, i)));
        worst = worst.max((lam - step).amax());
    }
    worst
}

/// Optimality measure of the pyramidal (box friction) linearization.
///
/// The maximum over contacts of the pyramid feasibility violation and of
/// the natural-map residual `|lam - P(lam - c)|`, where `P` clamps the
/// normal at zero and each tangential component to `[-mu lam_N, mu lam_N]`.
pub fn lcp_criterion(problem: &ContactProblem, lambda: &DVector<f64>) -> Result<f64> {
    problem.check_lambda(lambda)?;
    let c = problem.effective_velocity(lambda);
    Ok(lcp_criterion_from_velocity(problem, lambda, &c))
}

pub(crate) fn lcp_criterion_from_velocity(problem: &ContactProblem, lambda: &DVector<f64>, c: &DVector<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for (i, cone) in problem.cones().iter().enumerate() {
        let lam = block(lambda, i);
        let ci = block(c, i);
        let bound = cone.mu * lam[0].max(0.0);
        let infeasible = (-lam[0]).max(lam[1].abs() - cone.mu * lam[0]).max(lam[2].abs() - cone.mu * lam[0]).max(0.0);
        let r_n = (lam[0] - (lam[0] - ci[0]).max(0.0)).abs();
        let lt = tangential(&lam);
        let ct = tangential(&ci);
        let r_t = (0..2)
            .map(|k| (lt[k] - (lt[k] - ct[k]).clamp(-bound, bound)).abs())
            .fold(0.0, f64::max);
        worst = worst.max(infeasible).max(r_n).max(r_t);
    }
    worst
}

#[inline]
pub(crate) fn block(v: &DVector<f64>, i: usize) -> Vector3<f64> {
    Vector3::new(v[3 * i], v[3 * i + 1], v[3 * i + 2])
}
