use std::collections::BTreeMap;

use contactbench_core::{SolverConfig, SolverKind};
use contactbench_sim::{BodyModel, ExternalForce, RigidBodyState, Scene};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Half extent of the benchmark cubes, in meters.
pub const CUBE_HALF: f64 = 0.5;
pub const SLIDING_MU: f64 = 0.3;
pub const SLIDING_V0: f64 = 1.0;
pub const GROWING_FORCE_RATE: f64 = 20.0;
pub const GROWING_MU: f64 = 0.5;

/// Scene generators of the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Builtin {
    /// 1 kg cube launched along `+y` on a flat floor.
    SlidingCube { mu: f64, v0: f64, tangent_rotation_deg: f64 },
    /// 1 kg cube at rest pulled along `+y` by a force growing at `rate` N/s.
    GrowingForceCube { mu: f64, rate: f64 },
    /// Heavy cube on a light one; the masses are `sqrt(ratio)` and `1 / sqrt(ratio)` kg.
    StackedCubes { mass_ratio: f64 },
    /// Cube released with its bottom face `height` above the floor.
    DroppedCube { height: f64, restitution: f64 },
    /// Cube resting on a floor with normal compliance and Baumgarte gain `baumgarte` (1/s).
    CompliantRest { compliance: f64, baumgarte: f64 },
}

impl Builtin {
    pub fn sliding_cube() -> Self {
        Builtin::SlidingCube { mu: SLIDING_MU, v0: SLIDING_V0, tangent_rotation_deg: 0.0 }
    }

    pub fn scene(&self, dt: f64) -> Result<Scene> {
        let mut scene = Scene::new(dt);
        let cube = |mass: f64| BodyModel::cube(mass, CUBE_HALF);
        let resting = |z: f64| RigidBodyState::at_rest(Vector3::new(0.0, 0.0, z));
        match *self {
            Builtin::SlidingCube { mu, v0, tangent_rotation_deg } => {
                scene.mu = mu;
                scene.tangent_rotation = tangent_rotation_deg.to_radians();
                scene.add_body(cube(1.0)?, resting(CUBE_HALF).with_velocity(Vector3::new(0.0, v0, 0.0)));
            }
            Builtin::GrowingForceCube { mu, rate } => {
                scene.mu = mu;
                scene.add_body(cube(1.0)?, resting(CUBE_HALF));
                scene.forces.push(ExternalForce {
                    body: 0,
                    start: 0.0,
                    end: None,
                    force: Vector3::zeros(),
                    torque: Vector3::zeros(),
                    force_rate: Vector3::new(0.0, rate, 0.0),
                });
            }
            Builtin::StackedCubes { mass_ratio } => {
                if !(mass_ratio > 0.0) {
                    return Err(BenchError::InvalidArgument(format!("mass ratio must be > 0, got {mass_ratio}")));
                }
                let root = mass_ratio.sqrt();
                scene.add_body(cube(1.0 / root)?, resting(CUBE_HALF));
                scene.add_body(cube(root)?, resting(3.0 * CUBE_HALF));
            }
            Builtin::DroppedCube { height, restitution } => {
                scene.restitution = restitution;
                scene.add_body(cube(1.0)?, resting(CUBE_HALF + height));
            }
            Builtin::CompliantRest { compliance, baumgarte } => {
                scene.compliance = compliance;
                scene.baumgarte = baumgarte;
                scene.add_body(cube(1.0)?, resting(CUBE_HALF));
            }
        }
        scene.validate()?;
        Ok(scene)
    }
}

/// One benchmark scenario: a scene, a horizon and the solvers to compare.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub scene: Scene,
    pub duration: f64,
    pub solvers: Vec<SolverKind>,
    pub configs: BTreeMap<SolverKind, SolverConfig>,
    pub warm: bool,
}

impl ScenarioSpec {
    pub fn new(name: impl Into<String>, scene: Scene, duration: f64, solvers: Vec<SolverKind>, config: SolverConfig) -> Result<Self> {
        let configs = solvers.iter().map(|&k| (k, config.clone())).collect();
        let spec = Self { name: name.into(), scene, duration, solvers, configs, warm: true };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let dt = self.scene.dt;
        if !(self.duration > 0.0 && dt > 0.0 && dt <= self.duration) {
            return Err(BenchError::InvalidArgument(format!(
                "scenario {}: need duration > 0 and 0 < dt <= duration, got duration {} and dt {dt}",
                self.name, self.duration
            )));
        }
        self.scene.validate()?;
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.scene.dt).round() as usize
    }

    pub fn config(&self, kind: SolverKind) -> SolverConfig {
        self.configs.get(&kind).cloned().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stacked_masses_follow_the_ratio() {
        let s = Builtin::StackedCubes { mass_ratio: 1e6 }.scene(0.001).unwrap();
        assert!((s.bodies[1].mass / s.bodies[0].mass - 1e6).abs() < 1e-6);
        assert!(s.initial_states[1].position.z > s.initial_states[0].position.z);
    }

    #[test]
    fn step_count_rounds_the_horizon() {
        let scene = Builtin::sliding_cube().scene(0.001).unwrap();
        let spec = ScenarioSpec::new("s", scene, 1.0, vec![SolverKind::NcpPgs], SolverConfig::default()).unwrap();
        assert_eq!(spec.steps(), 1000);
    }

    #[test]
    fn rejects_dt_beyond_the_horizon() {
        let scene = Builtin::sliding_cube().scene(0.5).unwrap();
        assert!(ScenarioSpec::new("s", scene, 0.1, vec![], SolverConfig::default()).is_err());
    }
}
