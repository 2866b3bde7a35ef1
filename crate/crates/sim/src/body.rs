use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Mass properties and shape of a box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyModel {
    pub mass: f64,
    /// Diagonal of the body-frame inertia tensor.
    pub inertia: Vector3<f64>,
    pub half_extents: Vector3<f64>,
}

impl BodyModel {
    /// Box of uniform density.
    pub fn uniform_box(mass: f64, half_extents: Vector3<f64>) -> Result<Self> {
        let h2 = half_extents.component_mul(&half_extents);
        let inertia = Vector3::new(h2.y + h2.z, h2.x + h2.z, h2.x + h2.y) * (mass / 3.0);
        Self::with_inertia(mass, inertia, half_extents)
    }

    pub fn cube(mass: f64, half_extent: f64) -> Result<Self> {
        Self::uniform_box(mass, Vector3::repeat(half_extent))
    }

    pub fn with_inertia(mass: f64, inertia: Vector3<f64>, half_extents: Vector3<f64>) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(SimError::InvalidScene(format!("mass must be > 0, got {mass}")));
        }
        if !inertia.iter().all(|&i| i > 0.0 && i.is_finite()) {
            return Err(SimError::InvalidScene(format!("inertia must be > 0 componentwise, got {inertia:?}")));
        }
        if !half_extents.iter().all(|&h| h > 0.0 && h.is_finite()) {
            return Err(SimError::InvalidScene(format!("half extents must be > 0, got {half_extents:?}")));
        }
        Ok(Self { mass, inertia, half_extents })
    }

    /// Corner `k` in the body frame; bits 0, 1, 2 of `k` select the sign along x, y, z.
    pub fn corner(&self, k: usize) -> Vector3<f64> {
        let sign = |bit: usize| if k >> bit & 1 == 1 { 1.0 } else { -1.0 };
        Vector3::new(sign(0), sign(1), sign(2)).component_mul(&self.half_extents)
    }

    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&self.inertia)
    }
}

/// Pose and velocity of a rigid body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidBodyState {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
    pub linear_velocity: Vector3<f64>,
    /// Angular velocity expressed in the body frame.
    pub angular_velocity: Vector3<f64>,
}

impl RigidBodyState {
    pub fn at_rest(position: Vector3<f64>) -> Self {
        Self {
            position,
            orientation: UnitQuaternion::identity(),
            linear_velocity: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
        }
    }

    pub fn with_velocity(mut self, linear: Vector3<f64>) -> Self {
        self.linear_velocity = linear;
        self
    }

    pub fn to_world(&self, body_point: &Vector3<f64>) -> Vector3<f64> {
        self.position + self.orientation * body_point
    }

    /// World-frame velocity of a world-frame point rigidly attached to the body.
    pub fn point_velocity(&self, world_point: &Vector3<f64>) -> Vector3<f64> {
        let r = world_point - self.position;
        self.linear_velocity + (self.orientation * self.angular_velocity).cross(&r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_box_inertia() {
        let b = BodyModel::uniform_box(3.0, Vector3::new(1.0, 2.0, 3.0)).unwrap();
        assert_eq!(b.inertia, Vector3::new(13.0, 10.0, 5.0));
    }

    #[test]
    fn corners_cover_all_sign_patterns() {
        let b = BodyModel::cube(1.0, 0.5).unwrap();
        assert_eq!(b.corner(0), Vector3::repeat(-0.5));
        assert_eq!(b.corner(7), Vector3::repeat(0.5));
        assert_eq!(b.corner(1), Vector3::new(0.5, -0.5, -0.5));
    }

    #[test]
    fn rejects_nonpositive_mass() {
        assert!(BodyModel::cube(0.0, 0.5).is_err());
        assert!(BodyModel::cube(1.0, -0.5).is_err());
    }
}
