use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::body::{BodyModel, RigidBodyState};
use crate::error::{Result, SimError};
use crate::scene::Scene;

/// Largest tilt, in degrees, between stacked boxes handled by the box-box routine.
pub const MAX_STACK_TILT_DEG: f64 = 5.0;
/// Slack on the face-containment test of stacked corners.
const FACE_TOL: f64 = 1e-9;

/// Stable identity of a contact across time steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureId {
    /// Body owning the corner.
    pub body: usize,
    /// Other body in contact; `None` for the floor.
    pub other: Option<usize>,
    pub corner: u8,
}

/// Point contact with its local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPatch {
    pub point: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub t1: Vector3<f64>,
    pub t2: Vector3<f64>,
    /// Signed separation along the normal; negative when penetrating.
    pub gap: f64,
    /// Body pushed along `+normal`.
    pub upper: usize,
    /// Body pushed along `-normal`; `None` for the floor.
    pub lower: Option<usize>,
    pub feature: FeatureId,
}

impl ContactPatch {
    /// Columns `(N, T1, T2)` of the contact frame.
    pub fn frame(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.normal, self.t1, self.t2])
    }
}

/// Tangent basis of a normal, rotated by `angle` about it.
///
/// `T1 = N x e_x` (or `N x e_y` when degenerate) and `T2 = N x T1`.
pub fn tangent_basis(normal: &Vector3<f64>, angle: f64) -> (Vector3<f64>, Vector3<f64>) {
    let mut t1 = normal.cross(&Vector3::x());
    if t1.norm() < 1e-6 {
        t1 = normal.cross(&Vector3::y());
    }
    let t1 = t1.normalize();
    let t2 = normal.cross(&t1);
    let (s, c) = angle.sin_cos();
    (t1 * c + t2 * s, t2 * c - t1 * s)
}

/// Box-floor and stacked box-box contacts, sorted by feature id.
pub fn detect_contacts(scene: &Scene, states: &[RigidBodyState]) -> Result<Vec<ContactPatch>> {
    let normal = Vector3::z();
    let (t1, t2) = tangent_basis(&normal, scene.tangent_rotation);
    let margin = scene.contact_margin;
    let mut patches = Vec::new();
    let mut push = |point: Vector3<f64>, gap: f64, upper: usize, lower: Option<usize>, feature: FeatureId| {
        patches.push(ContactPatch { point, normal, t1, t2, gap, upper, lower, feature });
    };

    for (b, (model, state)) in scene.bodies.iter().zip(states).enumerate() {
        for k in 0..8 {
            let p = state.to_world(&model.corner(k));
            if p.z < margin {
                push(p, p.z, b, None, FeatureId { body: b, other: None, corner: k as u8 });
            }
        }
    }

    for a in 0..scene.bodies.len() {
        for b in a + 1..scene.bodies.len() {
            let (ma, sa) = (&scene.bodies[a], &states[a]);
            let (mb, sb) = (&scene.bodies[b], &states[b]);
            if !bounds_overlap(ma, sa, mb, sb, margin) {
                continue;
            }
            let tilt = tilt_deg(sa).max(tilt_deg(sb));
            if tilt > MAX_STACK_TILT_DEG {
                return Err(SimError::UnsupportedGeometry { first: a, second: b, tilt_deg: tilt });
            }
            let (upper, lower) = if sa.position.z >= sb.position.z { (a, b) } else { (b, a) };
            let (mu_, su) = (&scene.bodies[upper], &states[upper]);
            let (ml, sl) = (&scene.bodies[lower], &states[lower]);
            let lower_top = top_height(ml, sl);
            let upper_bottom = bottom_height(mu_, su);

            for k in 0..8 {
                let p = su.to_world(&mu_.corner(k));
                let gap = p.z - lower_top;
                if p.z - su.position.z < 0.0 && gap < margin && inside_face(ml, sl, &p, FACE_TOL) {
                    push(p, gap, upper, Some(lower), FeatureId { body: upper, other: Some(lower), corner: k as u8 });
                }
            }
            for k in 0..8 {
                let p = sl.to_world(&ml.corner(k));
                let gap = upper_bottom - p.z;
                if p.z - sl.position.z > 0.0 && gap < margin && inside_face(mu_, su, &p, -FACE_TOL) {
                    push(p, gap, upper, Some(lower), FeatureId { body: lower, other: Some(upper), corner: k as u8 });
                }
            }
        }
    }

    patches.sort_by_key(|p| p.feature);
    Ok(patches)
}

/// Angle between a box's most vertical axis and the world vertical.
fn tilt_deg(state: &RigidBodyState) -> f64 {
    let r = state.orientation.to_rotation_matrix();
    let best = (0..3).map(|k| r.matrix()[(2, k)].abs()).fold(0.0, f64::max);
    best.min(1.0).acos().to_degrees()
}

/// Vertical half-height of a face-parallel box.
fn vertical_half(model: &BodyModel, state: &RigidBodyState) -> f64 {
    let r = state.orientation.to_rotation_matrix();
    (0..3).map(|k| r.matrix()[(2, k)].abs() * model.half_extents[k]).sum()
}

fn top_height(model: &BodyModel, state: &RigidBodyState) -> f64 {
    state.position.z + vertical_half(model, state)
}

fn bottom_height(model: &BodyModel, state: &RigidBodyState) -> f64 {
    state.position.z - vertical_half(model, state)
}

/// Whether the horizontal projection of `p` lies within the box's footprint, up to `tol`.
fn inside_face(model: &BodyModel, state: &RigidBodyState, p: &Vector3<f64>, tol: f64) -> bool {
    let local = state.orientation.inverse() * (p - state.position);
    let r = state.orientation.to_rotation_matrix();
    (0..3).all(|k| r.matrix()[(2, k)].abs() > 0.5 || local[k].abs() <= model.half_extents[k] + tol)
}

fn bounds_overlap(ma: &BodyModel, sa: &RigidBodyState, mb: &BodyModel, sb: &RigidBodyState, margin: f64) -> bool {
    let extent = |m: &BodyModel, s: &RigidBodyState| {
        let r = s.orientation.to_rotation_matrix();
        r.matrix().abs() * m.half_extents
    };
    let (ea, eb) = (extent(ma, sa), extent(mb, sb));
    (0..3).all(|k| (sa.position[k] - sb.position[k]).abs() <= ea[k] + eb[k] + margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::UnitQuaternion;

    fn cube_scene(half: f64, z: f64) -> Scene {
        let mut s = Scene::new(0.01);
        s.add_body(BodyModel::cube(1.0, half).unwrap(), RigidBodyState::at_rest(Vector3::new(0.0, 0.0, z)));
        s
    }

    #[test]
    fn resting_cube_touches_with_four_bottom_corners() {
        let s = cube_scene(0.5, 0.5);
        let patches = detect_contacts(&s, &s.initial_states).unwrap();
        assert_eq!(patches.len(), 4);
        for p in &patches {
            assert_eq!(p.gap, 0.0);
            assert_eq!(p.point.z, 0.0);
        }
    }

    #[test]
    fn hovering_cube_has_no_contacts() {
        let s = cube_scene(0.5, 1.5);
        assert!(detect_contacts(&s, &s.initial_states).unwrap().is_empty());
    }

    #[test]
    fn small_cube_on_large_cube() {
        let mut s = cube_scene(1.0, 1.0);
        s.add_body(BodyModel::cube(1.0, 0.5).unwrap(), RigidBodyState::at_rest(Vector3::new(0.0, 0.0, 2.5)));
        let patches = detect_contacts(&s, &s.initial_states).unwrap();
        assert_eq!(patches.iter().filter(|p| p.lower.is_none()).count(), 4);
        let stacked: Vec<_> = patches.iter().filter(|p| p.lower.is_some()).collect();
        assert_eq!(stacked.len(), 4);
        assert!(stacked.iter().all(|p| p.upper == 1 && p.lower == Some(0) && p.feature.body == 1));
    }

    #[test]
    fn equal_stacked_cubes_give_four_contacts_between_them() {
        let mut s = cube_scene(0.5, 0.5);
        s.add_body(BodyModel::cube(1.0, 0.5).unwrap(), RigidBodyState::at_rest(Vector3::new(0.0, 0.0, 1.5)));
        let patches = detect_contacts(&s, &s.initial_states).unwrap();
        assert_eq!(patches.iter().filter(|p| p.lower == Some(0)).count(), 4);
    }

    #[test]
    fn tilted_stack_is_rejected() {
        let mut s = cube_scene(0.5, 0.5);
        let mut top = RigidBodyState::at_rest(Vector3::new(0.0, 0.0, 1.55));
        top.orientation = UnitQuaternion::from_euler_angles(0.3, 0.0, 0.0);
        s.add_body(BodyModel::cube(1.0, 0.5).unwrap(), top);
        assert!(matches!(detect_contacts(&s, &s.initial_states), Err(SimError::UnsupportedGeometry { .. })));
    }

    #[test]
    fn tangent_basis_is_right_handed() {
        for angle in [0.0, 0.3, std::f64::consts::FRAC_PI_4] {
            let n = Vector3::z();
            let (t1, t2) = tangent_basis(&n, angle);
            assert!((n.cross(&t1) - t2).norm() < 1e-12);
            assert!((t1.cross(&t2) - n).norm() < 1e-12);
            assert!((t1.norm() - 1.0).abs() < 1e-12 && t1.dot(&n).abs() < 1e-12);
        }
        let (t1, t2) = tangent_basis(&Vector3::z(), 0.0);
        assert_eq!(t1, Vector3::y());
        assert_eq!(t2, -Vector3::x());
    }
}
