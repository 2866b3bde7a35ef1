use contactbench_core::solvers::{enumerate_single_contact, single_contact_problem};
use contactbench_core::{ContactProblem, SolverConfig, SolverKind};
use nalgebra::{DMatrix, DVector, Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;

const MUS: [f64; 4] = [0.0, 0.3, 0.5, 1.0];

/// Random single-contact problems with `G = A'A + 0.1 I` and entries of
/// `A`, `g` uniform in `[-2, 2]`; friction cycles through 0, 0.3, 0.5, 1.
///
/// With `uncoupled`, the normal row of `G` is decoupled from the tangential ones.
pub fn random_single_contact_problems(count: usize, seed: u64, uncoupled: bool) -> Result<Vec<ContactProblem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let a = Matrix3::from_fn(|_, _| rng.gen_range(-2.0..2.0));
            let g = Vector3::from_fn(|_, _| rng.gen_range(-2.0..2.0));
            let mut delassus = a.transpose() * a + Matrix3::identity() * 0.1;
            if uncoupled {
                for j in 1..3 {
                    delassus[(0, j)] = 0.0;
                    delassus[(j, 0)] = 0.0;
                }
            }
            Ok(single_contact_problem(delassus, g, MUS[k % MUS.len()])?)
        })
        .collect()
}

/// Distance of one solver to the closest oracle solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleAgreement {
    pub solver: SolverKind,
    pub problems: usize,
    /// Largest `|lam - lam_oracle|_inf / (1 + |lam_oracle|_inf)`.
    pub max_distance: f64,
    pub unconverged: usize,
}

fn lambda3(v: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

/// Compares `kind` against the disjunctive oracle on every problem.
pub fn oracle_agreement(problems: &[ContactProblem], kind: SolverKind, config: &SolverConfig) -> Result<OracleAgreement> {
    let mut report = OracleAgreement { solver: kind, problems: problems.len(), max_distance: 0.0, unconverged: 0 };
    for p in problems {
        let s = kind.solve(p, config)?;
        let lam = lambda3(&s.lambda);
        let d = enumerate_single_contact(p)?
            .iter()
            .map(|c| (c.lambda - lam).amax() / (1.0 + c.lambda.amax()))
            .fold(f64::INFINITY, f64::min);
        report.max_distance = report.max_distance.max(d);
        report.unconverged += usize::from(!s.converged);
    }
    Ok(report)
}

/// Random frictionless multi-contact problems with a positive definite Delassus matrix.
pub fn random_frictionless_problems(count: usize, contacts: usize, seed: u64) -> Result<Vec<ContactProblem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 3 * contacts;
    (0..count)
        .map(|_| {
            let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let g = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
            let delassus = a.transpose() * a + DMatrix::identity(n, n) * 0.5;
            Ok(ContactProblem::new(delassus, g, &vec![0.0; contacts])?)
        })
        .collect()
}

/// Agreement of all solvers on frictionless problems.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrictionlessAgreement {
    pub problems: usize,
    /// Largest pairwise `|lam_a - lam_b|_inf` over problems and solver pairs.
    pub max_pairwise_distance: f64,
    pub unconverged: usize,
}

pub fn frictionless_agreement(problems: &[ContactProblem], solvers: &[SolverKind], config: &SolverConfig) -> Result<FrictionlessAgreement> {
    let mut report = FrictionlessAgreement { problems: problems.len(), max_pairwise_distance: 0.0, unconverged: 0 };
    for p in problems {
        let mut lambdas = Vec::with_capacity(solvers.len());
        for &kind in solvers {
            let s = kind.solve(p, config)?;
            report.unconverged += usize::from(!s.converged);
            lambdas.push(s.lambda);
        }
        for (i, a) in lambdas.iter().enumerate() {
            for b in &lambdas[i + 1..] {
                report.max_pairwise_distance = report.max_pairwise_distance.max((a - b).amax());
            }
        }
    }
    Ok(report)
}

/// Friction direction diagnostics on a sliding contact whose normal and
/// tangential rows are coupled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MdpDiagnostics {
    pub mu: f64,
    pub delassus: [[f64; 3]; 3],
    pub free_velocity: [f64; 3],
    pub raisim_lambda: [f64; 3],
    pub raisim_sliding: bool,
    /// Angle between `c_T` and `-lam_T - mu^2 lam_N / G_NN G_TN`, radians.
    pub raisim_kkt_angle: f64,
    /// Angle between `lam_T` and `-c_T`, degrees.
    pub raisim_mdp_angle_deg: f64,
    pub ncp_lambda: [f64; 3],
    /// Angle between `lam_T` and `-c_T`, radians.
    pub ncp_mdp_angle: f64,
}

fn angle(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    let cross = a.x * b.y - a.y * b.x;
    cross.atan2(a.dot(b)).abs()
}

/// The coupled sliding problem used for the friction direction diagnostics.
pub fn coupled_sliding_problem() -> Result<ContactProblem> {
    let delassus = Matrix3::new(1.0, 0.5, 0.2, 0.5, 1.2, 0.1, 0.2, 0.1, 0.9);
    let g = Vector3::new(-1.0, -1.5, 0.6);
    Ok(single_contact_problem(delassus, g, 0.5)?)
}

pub fn mdp_diagnostics(config: &SolverConfig) -> Result<MdpDiagnostics> {
    let problem = coupled_sliding_problem()?;
    let block = problem.block(0, 0);
    let mu = problem.mus()[0];
    let raisim = SolverKind::Raisim.solve(&problem, config)?;
    let ncp = SolverKind::NcpPgs.solve(&problem, config)?;
    let tangents = |s: &contactbench_core::ContactSolution| {
        let lam = lambda3(&s.lambda);
        let c = lambda3(&s.contact_velocity);
        (lam, Vector2::new(lam.y, lam.z), Vector2::new(c.y, c.z))
    };
    let (lam_r, lt_r, ct_r) = tangents(&raisim);
    let g_tn = Vector2::new(block[(1, 0)], block[(2, 0)]);
    let kkt_direction = -lt_r - g_tn * (mu * mu * lam_r.x / block[(0, 0)]);
    let (lam_n, lt_n, ct_n) = tangents(&ncp);
    let as_array = |v: Vector3<f64>| [v.x, v.y, v.z];
    Ok(MdpDiagnostics {
        mu,
        delassus: [0, 1, 2].map(|i| [0, 1, 2].map(|j| block[(i, j)])),
        free_velocity: as_array(problem.free_velocity_at(0)),
        raisim_lambda: as_array(lam_r),
        raisim_sliding: raisim.trace.branches.sliding > 0 && lt_r.norm() >= mu * lam_r.x * (1.0 - 1e-9) && lam_r.x > 0.0,
        raisim_kkt_angle: angle(&ct_r, &kkt_direction),
        raisim_mdp_angle_deg: angle(&lt_r, &(-ct_r)).to_degrees(),
        ncp_lambda: as_array(lam_n),
        ncp_mdp_angle: angle(&lt_n, &(-ct_n)),
    })
}
