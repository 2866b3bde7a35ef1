use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{empty_solution, finish, get3, initial_lambda, set3, Outcome};
use crate::config::{SolverConfig, WarmStart};
use crate::error::{ContactError, Result};
use crate::problem::ContactProblem;
use crate::solution::{AdmmState, ContactSolution, SolveTrace};

/// Ratio between primal and dual gaps that triggers a proximal update.
const BALANCE_RATIO: f64 = 10.0;
/// Bounds of the adaptive proximal parameter, relative to the largest diagonal entry.
const RHO_RANGE: (f64, f64) = (1e-10, 1e10);

pub(crate) struct AdmmSettings {
    pub max_iterations: usize,
    pub eps: f64,
    pub rho: f64,
    pub adaptive: bool,
    pub relaxation: Option<f64>,
    pub max_recorded_iterates: usize,
}

pub(crate) struct AdmmRun {
    pub z: DVector<f64>,
    pub dual: DVector<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
    pub criterion: f64,
    pub trace: SolveTrace,
}

fn factorize(h: &DMatrix<f64>, rho: f64) -> Result<Cholesky<f64, Dyn>> {
    let mut reg = h.clone();
    for k in 0..reg.nrows() {
        reg[(k, k)] += rho;
    }
    Cholesky::new(reg).ok_or(ContactError::Factorization { rho })
}

/// ADMM on `min 1/2 x'Hx + q'x` subject to `x` in a closed convex set.
///
/// `project` maps a vector onto the set in place. Iterates
/// `x <- -(H + rho I)^-1 (q - rho z + gamma)`, `z <- P(x + gamma / rho)`,
/// `gamma <- gamma + rho (x - z)` and stops once both the primal gap
/// `|x - z|_inf` and the dual gap `rho |z - z_prev|_inf` are below `eps`.
pub(crate) fn run_admm<P>(
    h: &DMatrix<f64>,
    q: &DVector<f64>,
    project: P,
    z0: DVector<f64>,
    dual0: DVector<f64>,
    settings: &AdmmSettings,
) -> Result<AdmmRun>
where
    P: Fn(&mut DVector<f64>),
{
    let scale = h.diagonal().amax().max(f64::MIN_POSITIVE);
    let (rho_lo, rho_hi) = (RHO_RANGE.0 * scale, RHO_RANGE.1 * scale);
    let mut rho = settings.rho;
    let mut chol = factorize(h, rho)?;
    let mut z = z0;
    let mut dual = dual0;
    let mut trace = SolveTrace::default();
    let mut criterion = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    for k in 1..=settings.max_iterations {
        let rhs = -(q - &z * rho + &dual);
        let x = chol.solve(&rhs);
        let x_hat = match settings.relaxation {
            Some(a) => &z * a + &x * (1.0 - a),
            None => x.clone(),
        };
        let z_prev = std::mem::replace(&mut z, &x_hat + &dual / rho);
        project(&mut z);
        dual += (&x_hat - &z) * rho;

        let primal = (&x - &z).amax();
        let dual_gap = rho * (&z - &z_prev).amax();
        iterations = k;
        criterion = primal.max(dual_gap);
        trace.record(criterion, &z, settings.max_recorded_iterates);
        trace.primal_gap.push(primal);
        if primal <= settings.eps && dual_gap <= settings.eps {
            converged = true;
            break;
        }
        if settings.adaptive {
            let next = if primal > BALANCE_RATIO * dual_gap {
                rho * 2.0
            } else if dual_gap > BALANCE_RATIO * primal {
                rho * 0.5
            } else {
                rho
            };
            let next = next.clamp(rho_lo, rho_hi);
            if next != rho {
                rho = next;
                chol = factorize(h, rho)?;
            }
        }
    }
    Ok(AdmmRun { z, dual, rho, iterations, converged, criterion, trace })
}

/// Default proximal parameter `0.1 trace(G) / dim`.
pub(crate) fn default_rho(h: &DMatrix<f64>) -> f64 {
    let dim = h.nrows().max(1) as f64;
    let rho = 0.1 * h.trace() / dim;
    if rho > 0.0 && rho.is_finite() {
        rho
    } else {
        1.0
    }
}

/// ADMM on the cone complementarity relaxation.
///
/// Factorizes `G + R + rho I` once (again on every proximal update when
/// `adaptive_rho` is set) and returns the feasible iterate `z`. A warm start
/// seeds `z` with the given impulses and the dual with the contact velocity
/// they produce unless a dual is supplied, and may carry the proximal
/// parameter over.
pub fn solve_ccp_admm(problem: &ContactProblem, config: &SolverConfig) -> Result<ContactSolution> {
    let started = Instant::now();
    config.validate()?;
    if problem.num_contacts() == 0 {
        return Ok(empty_solution(started));
    }
    let h = problem.effective_delassus();
    let g = problem.free_velocity();
    let z0 = initial_lambda(problem, config)?;
    let dual0 = match &config.warm_start {
        Some(WarmStart { dual: Some(dual), .. }) => {
            if dual.len() != problem.dim() {
                return Err(ContactError::Dimension { field: "warm_start.dual", expected: problem.dim(), actual: dual.len() });
            }
            dual.clone()
        }
        Some(_) => -(h * &z0 + g),
        None => DVector::zeros(problem.dim()),
    };
    let rho = config
        .warm_start
        .as_ref()
        .and_then(|ws| ws.rho)
        .or(config.admm_rho)
        .unwrap_or_else(|| default_rho(problem.delassus()));
    let settings = AdmmSettings {
        max_iterations: config.max_iterations,
        eps: config.eps_abs,
        rho,
        adaptive: config.adaptive_rho,
        relaxation: config.over_relaxation,
        max_recorded_iterates: config.max_recorded_iterates,
    };
    let cones = problem.cones();
    let run = run_admm(
        h,
        g,
        |v| {
            for (i, cone) in cones.iter().enumerate() {
                set3(v, i, &cone.project(&get3(v, i)));
            }
        },
        z0,
        dual0,
        &settings,
    )?;
    Ok(finish(
        problem,
        Outcome {
            lambda: run.z,
            stop_criterion: run.criterion,
            iterations: run.iterations,
            converged: run.converged,
            trace: run.trace,
            admm: Some(AdmmState { rho: run.rho, dual: run.dual }),
        },
        started,
    ))
}
