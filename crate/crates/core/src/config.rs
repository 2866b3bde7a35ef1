use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{ContactError, Result};

/// Initial guess handed to a solver, typically the previous time step's impulses.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WarmStart {
    pub lambda: DVector<f64>,
    /// Proximal parameter carried over by the ADMM solver.
    pub rho: Option<f64>,
    /// ADMM dual variable; `None` seeds it from the contact velocity of `lambda`.
    pub dual: Option<DVector<f64>>,
}

impl WarmStart {
    pub fn from_lambda(lambda: DVector<f64>) -> Self {
        Self { lambda, rho: None, dual: None }
    }
}

/// Damping schedule of the per-contact bisection solver.
///
/// The per-contact update is `lam <- alpha lam + (1 - alpha) lam*`, then
/// `alpha <- gamma alpha + (1 - gamma) alpha_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaisimParams {
    pub alpha0: f64,
    pub gamma: f64,
    pub alpha_min: f64,
}

impl Default for RaisimParams {
    fn default() -> Self {
        Self { alpha0: 0.9, gamma: 0.99, alpha_min: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaggeredParams {
    /// Iteration budget of each inner ADMM solve.
    pub inner_max_iterations: usize,
    /// Inner tolerance as a fraction of `eps_abs`.
    pub inner_eps_ratio: f64,
}

impl Default for StaggeredParams {
    fn default() -> Self {
        Self { inner_max_iterations: 2000, inner_eps_ratio: 0.1 }
    }
}

/// Settings shared by every solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Sweep budget (outer fixed-point iterations for staggered projections).
    pub max_iterations: usize,
    /// Absolute tolerance on the solver's stopping measure.
    pub eps_abs: f64,
    /// Relaxation weight `alpha` of `lam <- alpha lam_prev + (1 - alpha) lam`; `None` disables it.
    pub over_relaxation: Option<f64>,
    /// ADMM proximal parameter; `None` selects `0.1 trace(G) / (3 n_c)`.
    pub admm_rho: Option<f64>,
    pub adaptive_rho: bool,
    pub warm_start: Option<WarmStart>,
    /// Seeds a shuffled contact order in the Gauss-Seidel sweeps; `None` keeps the natural order.
    pub rng_seed: Option<u64>,
    /// Number of iterates kept in the solve trace.
    pub max_recorded_iterates: usize,
    pub raisim: RaisimParams,
    pub staggered: StaggeredParams,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            eps_abs: 1e-8,
            over_relaxation: None,
            admm_rho: None,
            adaptive_rho: false,
            warm_start: None,
            rng_seed: None,
            max_recorded_iterates: 0,
            raisim: RaisimParams::default(),
            staggered: StaggeredParams::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_tolerance(eps_abs: f64, max_iterations: usize) -> Self {
        Self { eps_abs, max_iterations, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(ContactError::InvalidArgument("max_iterations must be >= 1".into()));
        }
        if !(self.eps_abs > 0.0) {
            return Err(ContactError::InvalidArgument(format!("eps_abs must be > 0, got {}", self.eps_abs)));
        }
        if let Some(a) = self.over_relaxation {
            if !(a > 0.0 && a < 2.0) {
                return Err(ContactError::InvalidArgument(format!("over_relaxation must lie in (0, 2), got {a}")));
            }
        }
        if let Some(rho) = self.admm_rho {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(ContactError::InvalidArgument(format!("admm_rho must be > 0, got {rho}")));
            }
        }
        let r = &self.raisim;
        if !(r.alpha0 >= 0.0 && r.alpha0 < 1.0 && (0.0..=1.0).contains(&r.gamma) && r.alpha_min >= 0.0 && r.alpha_min < 1.0) {
            return Err(ContactError::InvalidArgument(format!("invalid damping schedule {r:?}")));
        }
        if self.staggered.inner_max_iterations < 1 || !(self.staggered.inner_eps_ratio > 0.0) {
            return Err(ContactError::InvalidArgument("invalid staggered inner settings".into()));
        }
        Ok(())
    }
}
