use std::collections::BTreeMap;

use contactbench_core::{BranchCounts, SolverConfig, SolverKind};
use contactbench_sim::{mechanical_energy, FeatureId, RigidBodyState, Scene, Simulation};
use nalgebra::Vector3;

use crate::error::Result;
use crate::scenario::ScenarioSpec;

/// Per-contact data of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactRecord {
    pub feature: FeatureId,
    /// Impulse `(N, T1, T2)`.
    pub lambda: Vector3<f64>,
    /// Contact velocity `G lam + g`.
    pub velocity: Vector3<f64>,
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

/// State and solver statistics after one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub time: f64,
    pub states: Vec<RigidBodyState>,
    pub contacts: Vec<ContactRecord>,
    pub ncp_criterion: f64,
    pub stop_criterion: f64,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub solve_time_ns: u64,
    pub branches: BranchCounts,
    pub reused_features: usize,
}

/// Trajectory of one solver through one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub solver: SolverKind,
    pub dt: f64,
    pub initial_states: Vec<RigidBodyState>,
    pub initial_energy: f64,
    /// World directions of the tangent axes `T1`, `T2`.
    pub tangents: (Vector3<f64>, Vector3<f64>),
    pub steps: Vec<StepRecord>,
}

impl TrajectoryRecord {
    /// Times of the grid, starting at 0 with the initial state.
    pub fn times(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.steps.iter().map(|s| s.time)).collect()
    }

    /// Center-of-mass positions of every body on the grid.
    pub fn positions(&self) -> Vec<Vec<Vector3<f64>>> {
        std::iter::once(&self.initial_states)
            .chain(self.steps.iter().map(|s| &s.states))
            .map(|states| states.iter().map(|st| st.position).collect())
            .collect()
    }

    pub fn horizon(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.time)
    }

    pub fn max_contacts(&self) -> usize {
        self.steps.iter().map(|s| s.contacts.len()).max().unwrap_or(0)
    }

    pub fn mean_iterations(&self) -> f64 {
        let with_contacts: Vec<_> = self.steps.iter().filter(|s| !s.contacts.is_empty()).collect();
        if with_contacts.is_empty() {
            return 0.0;
        }
        with_contacts.iter().map(|s| s.iterations as f64).sum::<f64>() / with_contacts.len() as f64
    }

    pub fn final_energy(&self) -> f64 {
        self.steps.last().map_or(self.initial_energy, |s| s.energy)
    }

    pub fn branch_totals(&self) -> BranchCounts {
        let mut total = BranchCounts::default();
        for s in &self.steps {
            total += s.branches;
        }
        total
    }

    /// Zeroes every wall-time field.
    pub fn clear_timings(&mut self) {
        for s in &mut self.steps {
            s.solve_time_ns = 0;
        }
    }
}

/// Steps one solver through `scene` for `steps` steps.
pub fn run_solver(scene: &Scene, kind: SolverKind, config: &SolverConfig, steps: usize, warm: bool) -> Result<TrajectoryRecord> {
    let mut sim = Simulation::new(scene.clone(), warm)?;
    let normal = Vector3::z();
    let tangents = contactbench_sim::tangent_basis(&normal, scene.tangent_rotation);
    let mut record = TrajectoryRecord {
        solver: kind,
        dt: scene.dt,
        initial_states: sim.states.clone(),
        initial_energy: mechanical_energy(scene, &sim.states),
        tangents,
        steps: Vec::with_capacity(steps),
    };
    for _ in 0..steps {
        let out = sim.step(kind, config)?;
        let s = &out.solution;
        let contacts = out
            .patches
            .iter()
            .enumerate()
            .map(|(i, p)| ContactRecord {
                feature: p.feature,
                lambda: Vector3::new(s.lambda[3 * i], s.lambda[3 * i + 1], s.lambda[3 * i + 2]),
                velocity: Vector3::new(
                    s.contact_velocity[3 * i],
                    s.contact_velocity[3 * i + 1],
                    s.contact_velocity[3 * i + 2],
                ),
                primal: s.residuals.primal[i],
                dual: s.residuals.dual[i],
                complementarity: s.residuals.complementarity[i],
            })
            .collect();
        record.steps.push(StepRecord {
            time: sim.time,
            energy: mechanical_energy(scene, &sim.states),
            states: sim.states.clone(),
            contacts,
            ncp_criterion: s.residuals.ncp_criterion,
            stop_criterion: s.stop_criterion,
            iterations: s.iterations,
            converged: s.converged,
            solve_time_ns: (s.solve_time * 1e9).round() as u64,
            branches: s.trace.branches,
            reused_features: out.reused_features,
        });
    }
    Ok(record)
}

/// Trajectories of every solver of a scenario, with per-solver failures.
#[derive(Debug, Clone, Default)]
pub struct ScenarioRun {
    pub records: BTreeMap<SolverKind, TrajectoryRecord>,
    pub errors: BTreeMap<SolverKind, String>,
}

/// Runs every solver of `spec` on a fresh copy of its scene.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioRun> {
    spec.validate()?;
    let mut run = ScenarioRun::default();
    for &kind in &spec.solvers {
        match run_solver(&spec.scene, kind, &spec.config(kind), spec.steps(), spec.warm) {
            Ok(record) => {
                run.records.insert(kind, record);
            }
            Err(e) => {
                run.errors.insert(kind, e.to_string());
            }
        }
    }
    Ok(run)
}
