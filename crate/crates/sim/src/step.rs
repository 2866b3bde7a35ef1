use std::collections::BTreeMap;

use contactbench_core::{ContactProblem, ContactSolution, SolverConfig, SolverKind, WarmStart};
use nalgebra::{DMatrix, DVector, Vector3};

use crate::body::RigidBodyState;
use crate::contact::{detect_contacts, ContactPatch, FeatureId};
use crate::dynamics::{
    assemble_delassus, build_jacobian, compose_target_velocity, compute_free_velocity, integrate_positions,
    inverse_mass_diagonal,
};
use crate::error::Result;
use crate::scene::Scene;

/// Impulses of the previous step keyed by contact feature.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WarmCache {
    pub impulses: BTreeMap<FeatureId, Vector3<f64>>,
    /// ADMM dual variables per feature.
    pub duals: BTreeMap<FeatureId, Vector3<f64>>,
    pub rho: Option<f64>,
}

impl WarmCache {
    pub fn from_solution(patches: &[ContactPatch], solution: &ContactSolution) -> Self {
        let block = |v: &DVector<f64>, i: usize| Vector3::new(v[3 * i], v[3 * i + 1], v[3 * i + 2]);
        let impulses = patches.iter().enumerate().map(|(i, p)| (p.feature, block(&solution.lambda, i))).collect();
        let (duals, rho) = match &solution.admm {
            Some(state) => (
                patches.iter().enumerate().map(|(i, p)| (p.feature, block(&state.dual, i))).collect(),
                Some(state.rho),
            ),
            None => (BTreeMap::new(), None),
        };
        Self { impulses, duals, rho }
    }

    /// Warm start for `patches`, zero for features absent from the cache.
    ///
    /// Returns the warm start and the number of reused features. Duals are
    /// transferred only when every feature persists.
    pub fn warm_start(&self, patches: &[ContactPatch]) -> (WarmStart, usize) {
        let mut lambda = DVector::zeros(3 * patches.len());
        let mut reused = 0;
        for (i, p) in patches.iter().enumerate() {
            if let Some(l) = self.impulses.get(&p.feature) {
                lambda.fixed_rows_mut::<3>(3 * i).copy_from(l);
                reused += 1;
            }
        }
        let all_duals = !patches.is_empty() && patches.iter().all(|p| self.duals.contains_key(&p.feature));
        let dual = all_duals.then(|| {
            DVector::from_iterator(3 * patches.len(), patches.iter().flat_map(|p| self.duals[&p.feature].iter().copied().collect::<Vec<_>>()))
        });
        (WarmStart { lambda, rho: self.rho, dual }, reused)
    }
}

/// Result of one time step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub states: Vec<RigidBodyState>,
    pub solution: ContactSolution,
    pub patches: Vec<ContactPatch>,
    pub problem: ContactProblem,
    pub warm_cache: WarmCache,
    /// Contacts whose feature was found in the incoming cache.
    pub reused_features: usize,
}

/// Contact problem of the current configuration.
///
/// Returns the problem, the contact Jacobian and the free velocity.
pub fn assemble_problem(
    scene: &Scene,
    states: &[RigidBodyState],
    patches: &[ContactPatch],
    time: f64,
) -> Result<(ContactProblem, DMatrix<f64>, DVector<f64>)> {
    let v_free = compute_free_velocity(scene, states, time, scene.dt);
    let j = build_jacobian(patches, states);
    let delassus = assemble_delassus(&j, &scene.bodies);
    let v_now = DVector::from_iterator(
        6 * states.len(),
        states.iter().flat_map(|s| s.linear_velocity.iter().chain(s.angular_velocity.iter()).copied().collect::<Vec<_>>()),
    );
    let pre = &j * v_now;
    let target = compose_target_velocity(patches, &pre, scene);
    let g = &j * &v_free - target;
    let mus: Vec<f64> = patches.iter().map(|p| scene.friction(p.upper, p.lower)).collect();
    let problem = if scene.compliance > 0.0 || scene.tangential_compliance > 0.0 {
        let r = DVector::from_iterator(
            3 * patches.len(),
            patches.iter().flat_map(|_| [scene.compliance, scene.tangential_compliance, scene.tangential_compliance]),
        );
        ContactProblem::with_compliance(delassus, g, &mus, Some(r))?
    } else {
        ContactProblem::new(delassus, g, &mus)?
    };
    Ok((problem, j, v_free))
}

/// New states after applying contact impulses `lambda` through `J'`.
pub fn advance(
    scene: &Scene,
    states: &[RigidBodyState],
    j: &DMatrix<f64>,
    v_free: DVector<f64>,
    lambda: &DVector<f64>,
) -> Vec<RigidBodyState> {
    let impulse = j.transpose() * lambda;
    let v_next = v_free + inverse_mass_diagonal(&scene.bodies).component_mul(&impulse);
    let mut next = states.to_vec();
    integrate_positions(&mut next, &v_next, scene.dt);
    next
}

/// Advances the scene by one time step.
///
/// Detects contacts, assembles and solves the contact problem (warm-started
/// from `warm` when given), applies the impulses and integrates positions.
pub fn step_scene(
    scene: &Scene,
    states: &[RigidBodyState],
    time: f64,
    kind: SolverKind,
    config: &SolverConfig,
    warm: Option<&WarmCache>,
) -> Result<StepOutput> {
    let patches = detect_contacts(scene, states)?;
    let (problem, j, v_free) = assemble_problem(scene, states, &patches, time)?;
    let mut config = config.clone();
    let mut reused_features = 0;
    if let Some(cache) = warm {
        let (ws, reused) = cache.warm_start(&patches);
        reused_features = reused;
        config.warm_start = Some(ws);
    }
    let solution = kind.solve(&problem, &config)?;
    let next = advance(scene, states, &j, v_free, &solution.lambda);
    let warm_cache = WarmCache::from_solution(&patches, &solution);
    Ok(StepOutput { states: next, solution, patches, problem, warm_cache, reused_features })
}

/// Stateful stepping of one scene.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub scene: Scene,
    pub states: Vec<RigidBodyState>,
    pub time: f64,
    pub steps: usize,
    pub warm: Option<WarmCache>,
}

impl Simulation {
    /// `warm` enables feature-matched warm starts between steps.
    pub fn new(scene: Scene, warm: bool) -> Result<Self> {
        scene.validate()?;
        let states = scene.initial_states.clone();
        Ok(Self { scene, states, time: 0.0, steps: 0, warm: warm.then(WarmCache::default) })
    }

    pub fn step(&mut self, kind: SolverKind, config: &SolverConfig) -> Result<StepOutput> {
        let out = step_scene(&self.scene, &self.states, self.time, kind, config, self.warm.as_ref())?;
        self.states.clone_from(&out.states);
        if let Some(cache) = self.warm.as_mut() {
            cache.clone_from(&out.warm_cache);
        }
        self.steps += 1;
        self.time = self.steps as f64 * self.scene.dt;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::BodyModel;

    fn resting_cube(dt: f64) -> Scene {
        let mut s = Scene::new(dt);
        s.add_body(BodyModel::cube(1.0, 0.5).unwrap(), RigidBodyState::at_rest(Vector3::new(0.0, 0.0, 0.5)));
        s
    }

    fn tight() -> SolverConfig {
        SolverConfig::with_tolerance(1e-12, 10_000)
    }

    #[test]
    fn resting_cube_weight_is_supported() {
        let s = resting_cube(0.01);
        let out = step_scene(&s, &s.initial_states, 0.0, SolverKind::NcpPgs, &tight(), None).unwrap();
        let total: f64 = (0..4).map(|i| out.solution.lambda[3 * i]).sum();
        assert!((total - 9.81 * 0.01).abs() < 1e-8, "{total}");
        assert!(out.states[0].linear_velocity.norm() < 1e-9);
    }

    #[test]
    fn hovering_cube_is_ballistic() {
        let mut s = resting_cube(0.01);
        s.initial_states[0].position.z = 2.0;
        let out = step_scene(&s, &s.initial_states, 0.0, SolverKind::NcpPgs, &tight(), None).unwrap();
        assert!(out.patches.is_empty());
        assert!((out.states[0].linear_velocity.z + 0.0981).abs() < 1e-15);
    }

    #[test]
    fn inelastic_drop_stops_the_normal_motion() {
        let mut s = resting_cube(0.01);
        s.initial_states[0].position.z = 0.5 + 5e-5;
        s.initial_states[0].linear_velocity.z = -2.0;
        let out = step_scene(&s, &s.initial_states, 0.0, SolverKind::NcpPgs, &tight(), None).unwrap();
        assert_eq!(out.patches.len(), 4);
        let c = &out.solution.contact_velocity;
        for i in 0..4 {
            assert!(c[3 * i].abs() < 1e-9);
        }
    }

    #[test]
    fn warm_cache_matches_features() {
        let mut sim = Simulation::new(resting_cube(0.01), true).unwrap();
        let first = sim.step(SolverKind::NcpPgs, &tight()).unwrap();
        assert_eq!(first.reused_features, 0);
        let second = sim.step(SolverKind::NcpPgs, &tight()).unwrap();
        assert_eq!(second.reused_features, 4);
        assert!(second.solution.iterations <= 2);
    }

    #[test]
    fn admm_warm_start_carries_the_dual() {
        let mut sim = Simulation::new(resting_cube(0.01), true).unwrap();
        sim.step(SolverKind::CcpAdmm, &tight()).unwrap();
        let cache = sim.warm.clone().unwrap();
        assert_eq!(cache.duals.len(), 4);
        assert!(cache.rho.is_some());
        let patches = detect_contacts(&sim.scene, &sim.states).unwrap();
        assert!(cache.warm_start(&patches).0.dual.is_some());
    }
}
