use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::body::{BodyModel, RigidBodyState};
use crate::error::{Result, SimError};

/// Combination rule of restitution and Baumgarte normal targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetRule {
    #[default]
    Max,
    Sum,
}

/// Wrench applied at a body's center of mass over `[start, end)`.
///
/// The force grows linearly as `force + force_rate (t - start)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExternalForce {
    pub body: usize,
    #[serde(default)]
    pub start: f64,
    /// End of the window; `None` keeps the force on.
    #[serde(default)]
    pub end: Option<f64>,
    #[serde(default = "Vector3::zeros")]
    pub force: Vector3<f64>,
    #[serde(default = "Vector3::zeros")]
    pub torque: Vector3<f64>,
    #[serde(default = "Vector3::zeros")]
    pub force_rate: Vector3<f64>,
}

impl ExternalForce {
    /// World-frame (force, torque) at time `t`.
    pub fn wrench_at(&self, t: f64) -> (Vector3<f64>, Vector3<f64>) {
        if t >= self.start && self.end.is_none_or(|end| t < end) {
            (self.force + self.force_rate * (t - self.start), self.torque)
        } else {
            (Vector3::zeros(), Vector3::zeros())
        }
    }
}

/// Friction coefficient of one body pair; `second = None` denotes the floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairFriction {
    pub first: usize,
    pub second: Option<usize>,
    pub mu: f64,
}

/// Boxes above the floor half-space `z >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub bodies: Vec<BodyModel>,
    pub initial_states: Vec<RigidBodyState>,
    pub gravity: Vector3<f64>,
    pub mu: f64,
    pub pair_friction: Vec<PairFriction>,
    pub restitution: f64,
    /// Baumgarte gain in 1/s.
    pub baumgarte: f64,
    pub target_rule: TargetRule,
    /// Diagonal compliance added to the normal rows of the Delassus matrix.
    pub compliance: f64,
    /// Diagonal compliance added to the tangential rows.
    pub tangential_compliance: f64,
    pub dt: f64,
    pub forces: Vec<ExternalForce>,
    /// Rotation of the contact tangent basis about the normal, in radians.
    pub tangent_rotation: f64,
    /// Gap below which a corner becomes a contact.
    pub contact_margin: f64,
}

pub const DEFAULT_MARGIN: f64 = 1e-4;

impl Scene {
    pub fn new(dt: f64) -> Self {
        Self {
            bodies: Vec::new(),
            initial_states: Vec::new(),
            gravity: Vector3::new(0.0, 0.0, -9.81),
            mu: 0.5,
            pair_friction: Vec::new(),
            restitution: 0.0,
            baumgarte: 0.0,
            target_rule: TargetRule::Max,
            compliance: 0.0,
            tangential_compliance: 0.0,
            dt,
            forces: Vec::new(),
            tangent_rotation: 0.0,
            contact_margin: DEFAULT_MARGIN,
        }
    }

    pub fn add_body(&mut self, model: BodyModel, state: RigidBodyState) -> usize {
        self.bodies.push(model);
        self.initial_states.push(state);
        self.bodies.len() - 1
    }

    pub fn friction(&self, first: usize, second: Option<usize>) -> f64 {
        self.pair_friction
            .iter()
            .find(|p| {
                (p.first == first && p.second == second) || (Some(p.first) == second && p.second == Some(first))
            })
            .map_or(self.mu, |p| p.mu)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SimError::InvalidScene(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if self.bodies.len() != self.initial_states.len() {
            return bad("every body needs an initial state".into());
        }
        if !(self.mu >= 0.0) || self.pair_friction.iter().any(|p| !(p.mu >= 0.0)) {
            return bad("friction coefficients must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.restitution) {
            return bad(format!("restitution must lie in [0, 1], got {}", self.restitution));
        }
        if !(self.baumgarte >= 0.0) || !(self.compliance >= 0.0) || !(self.tangential_compliance >= 0.0) {
            return bad("baumgarte and compliance must be >= 0".into());
        }
        if !(self.contact_margin >= 0.0) {
            return bad("contact margin must be >= 0".into());
        }
        let n = self.bodies.len();
        if let Some(f) = self.forces.iter().find(|f| f.body >= n) {
            return bad(format!("external force references body {} but the scene has {n}", f.body));
        }
        if let Some(p) = self.pair_friction.iter().find(|p| p.first >= n || p.second.is_some_and(|s| s >= n)) {
            return bad(format!("pair friction references unknown body in {p:?}"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SceneFile = serde_json::from_str(text).map_err(|e| SimError::InvalidScene(e.to_string()))?;
        file.into_scene()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SceneFile::from_scene(self)).expect("scene serializes")
    }
}

/// On-disk scene description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneFile {
    pub bodies: Vec<BodyFile>,
    #[serde(default = "default_gravity")]
    pub gravity: [f64; 3],
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub pair_friction: Vec<PairFriction>,
    #[serde(default)]
    pub restitution: f64,
    #[serde(default)]
    pub baumgarte: f64,
    #[serde(default)]
    pub target_rule: TargetRule,
    #[serde(default)]
    pub compliance: f64,
    #[serde(default)]
    pub tangential_compliance: f64,
    pub dt: f64,
    #[serde(default)]
    pub forces: Vec<ExternalForce>,
    /// Tangent basis rotation about the normal, in degrees.
    #[serde(default)]
    pub tangent_rotation_deg: f64,
    #[serde(default = "default_margin")]
    pub contact_margin: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BodyFile {
    pub mass: f64,
    pub half_extents: [f64; 3],
    /// Body-frame inertia diagonal; uniform density when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia: Option<[f64; 3]>,
    pub position: [f64; 3],
    /// Unit quaternion `(w, x, y, z)`.
    #[serde(default = "identity_quaternion")]
    pub orientation: [f64; 4],
    #[serde(default)]
    pub linear_velocity: [f64; 3],
    /// Body-frame angular velocity.
    #[serde(default)]
    pub angular_velocity: [f64; 3],
}

fn default_gravity() -> [f64; 3] {
    [0.0, 0.0, -9.81]
}

fn default_mu() -> f64 {
    0.5
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

fn identity_quaternion() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

impl SceneFile {
    pub fn into_scene(self) -> Result<Scene> {
        let mut scene = Scene::new(self.dt);
        for (k, b) in self.bodies.iter().enumerate() {
            let half = Vector3::from(b.half_extents);
            let model = match b.inertia {
                Some(i) => BodyModel::with_inertia(b.mass, Vector3::from(i), half),
                None => BodyModel::uniform_box(b.mass, half),
            }
            .map_err(|e| SimError::InvalidScene(format!("bodies[{k}]: {e}")))?;
            let [w, x, y, z] = b.orientation;
            let q = Quaternion::new(w, x, y, z);
            if !(q.norm() > 0.0) {
                return Err(SimError::InvalidScene(format!("bodies[{k}]: orientation must be nonzero")));
            }
            let state = RigidBodyState {
                position: Vector3::from(b.position),
                orientation: UnitQuaternion::from_quaternion(q),
                linear_velocity: Vector3::from(b.linear_velocity),
                angular_velocity: Vector3::from(b.angular_velocity),
            };
            scene.add_body(model, state);
        }
        scene.gravity = Vector3::from(self.gravity);
        scene.mu = self.mu;
        scene.pair_friction = self.pair_friction;
        scene.restitution = self.restitution;
        scene.baumgarte = self.baumgarte;
        scene.target_rule = self.target_rule;
        scene.compliance = self.compliance;
        scene.tangential_compliance = self.tangential_compliance;
        scene.forces = self.forces;
        scene.tangent_rotation = self.tangent_rotation_deg.to_radians();
        scene.contact_margin = self.contact_margin;
        scene.validate()?;
        Ok(scene)
    }

    pub fn from_scene(scene: &Scene) -> Self {
        let bodies = scene
            .bodies
            .iter()
            .zip(&scene.initial_states)
            .map(|(m, s)| {
                let q = s.orientation.quaternion();
                BodyFile {
                    mass: m.mass,
                    half_extents: m.half_extents.into(),
                    inertia: Some(m.inertia.into()),
                    position: s.position.into(),
                    orientation: [q.w, q.i, q.j, q.k],
                    linear_velocity: s.linear_velocity.into(),
                    angular_velocity: s.angular_velocity.into(),
                }
            })
            .collect();
        Self {
            bodies,
            gravity: scene.gravity.into(),
            mu: scene.mu,
            pair_friction: scene.pair_friction.clone(),
            restitution: scene.restitution,
            baumgarte: scene.baumgarte,
            target_rule: scene.target_rule,
            compliance: scene.compliance,
            tangential_compliance: scene.tangential_compliance,
            dt: scene.dt,
            forces: scene.forces.clone(),
            tangent_rotation_deg: scene.tangent_rotation.to_degrees(),
            contact_margin: scene.contact_margin,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE: &str = r#"{
        "dt": 0.001,
        "mu": 0.3,
        "bodies": [{"mass": 1.0, "half_extents": [0.5, 0.5, 0.5], "position": [0, 0, 0.5], "linear_velocity": [0, 1, 0]}]
    }"#;

    #[test]
    fn parses_with_defaults() {
        let s = Scene::from_json(CUBE).unwrap();
        assert_eq!(s.bodies.len(), 1);
        assert_eq!(s.gravity, Vector3::new(0.0, 0.0, -9.81));
        assert_eq!(s.contact_margin, DEFAULT_MARGIN);
        assert!((s.bodies[0].inertia.x - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn round_trips_through_json() {
        let s = Scene::from_json(CUBE).unwrap();
        assert_eq!(Scene::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn rejects_invalid_fields() {
        assert!(Scene::from_json(&CUBE.replace("0.001", "0.0")).is_err());
        assert!(Scene::from_json(&CUBE.replace("\"mu\": 0.3", "\"restitution\": 1.5")).is_err());
        assert!(Scene::from_json("{").is_err());
    }

    #[test]
    fn ramped_force_window() {
        let f = ExternalForce {
            body: 0,
            start: 1.0,
            end: Some(2.0),
            force: Vector3::zeros(),
            torque: Vector3::zeros(),
            force_rate: Vector3::new(0.0, 20.0, 0.0),
        };
        assert_eq!(f.wrench_at(1.5).0, Vector3::new(0.0, 10.0, 0.0));
        assert_eq!(f.wrench_at(2.0).0, Vector3::zeros());
        assert_eq!(f.wrench_at(0.5).0, Vector3::zeros());
    }

    #[test]
    fn pair_friction_overrides_the_default() {
        let mut s = Scene::new(0.01);
        s.pair_friction.push(PairFriction { first: 1, second: Some(0), mu: 0.1 });
        assert_eq!(s.friction(0, Some(1)), 0.1);
        assert_eq!(s.friction(0, None), 0.5);
    }
}
