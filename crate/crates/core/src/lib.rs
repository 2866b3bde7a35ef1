//! Frictional contact problems and the solvers that target them.
//!
//! A [`ContactProblem`] gathers the Delassus matrix, the free velocity and the
//! friction coefficients of `n_c` point contacts, each expressed in a local
//! frame ordered `(N, T1, T2)`. Solvers return a [`ContactSolution`] whose
//! residuals are always measured against the exact Coulomb law.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cone;
pub mod config;
pub mod error;
pub mod problem;
pub mod residuals;
pub mod solution;
pub mod solvers;

pub use cone::FrictionCone;
pub use config::{RaisimParams, SolverConfig, StaggeredParams, WarmStart};
pub use error::{ContactError, Result};
pub use problem::{ContactProblem, ProblemFile};
pub use residuals::{ccp_stationarity, compute_residuals, lcp_criterion, Residuals};
pub use solution::{AdmmState, BranchCounts, ContactSolution, SolveTrace};
pub use solvers::{over_relax, SolverKind};
