use nalgebra::{DMatrix, DVector, UnitQuaternion, Vector3};

use crate::body::{BodyModel, RigidBodyState};
use crate::contact::ContactPatch;
use crate::scene::{Scene, TargetRule};

/// Generalized velocities per body: world linear velocity then body-frame angular velocity.
pub const BODY_DOF: usize = 6;

/// Velocity of every body after external forces, gravity and gyroscopic
/// effects, before contact impulses.
pub fn compute_free_velocity(scene: &Scene, states: &[RigidBodyState], time: f64, dt: f64) -> DVector<f64> {
    let mut v = DVector::zeros(BODY_DOF * states.len());
    for (b, (model, state)) in scene.bodies.iter().zip(states).enumerate() {
        let (mut force, mut torque) = (scene.gravity * model.mass, Vector3::zeros());
        for f in scene.forces.iter().filter(|f| f.body == b) {
            let (fw, tw) = f.wrench_at(time);
            force += fw;
            torque += tw;
        }
        let w = state.angular_velocity;
        let torque_body = state.orientation.inverse() * torque;
        let gyro = w.cross(&model.inertia.component_mul(&w));
        let lin = state.linear_velocity + force * (dt / model.mass);
        let ang = w + (torque_body - gyro).component_div(&model.inertia) * dt;
        v.fixed_rows_mut::<3>(BODY_DOF * b).copy_from(&lin);
        v.fixed_rows_mut::<3>(BODY_DOF * b + 3).copy_from(&ang);
    }
    v
}

/// Map from body velocities to relative contact velocities in `(N, T1, T2)`.
///
/// For a body with orientation `R` and body-frame lever arm `r` to the
/// contact point, the point velocity is `v - R [r]x w`. The body above the
/// contact counts positively, the one below negatively; the floor has no
/// columns.
pub fn build_jacobian(patches: &[ContactPatch], states: &[RigidBodyState]) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(3 * patches.len(), BODY_DOF * states.len());
    for (i, patch) in patches.iter().enumerate() {
        let frame_t = patch.frame().transpose();
        let bodies = [(patch.upper, 1.0)].into_iter().chain(patch.lower.map(|l| (l, -1.0)));
        for (b, sign) in bodies {
            let state = &states[b];
            let r_body = state.orientation.inverse() * (patch.point - state.position);
            let rot = state.orientation.to_rotation_matrix().into_inner();
            let ang = -frame_t * rot * r_body.cross_matrix();
            let mut lin_block = j.fixed_view_mut::<3, 3>(3 * i, BODY_DOF * b);
            lin_block += frame_t * sign;
            let mut ang_block = j.fixed_view_mut::<3, 3>(3 * i, BODY_DOF * b + 3);
            ang_block += ang * sign;
        }
    }
    j
}

/// Diagonal of the inverse generalized mass matrix.
pub fn inverse_mass_diagonal(bodies: &[BodyModel]) -> DVector<f64> {
    DVector::from_iterator(
        BODY_DOF * bodies.len(),
        bodies.iter().flat_map(|m| {
            let inv_m = 1.0 / m.mass;
            [inv_m, inv_m, inv_m, 1.0 / m.inertia.x, 1.0 / m.inertia.y, 1.0 / m.inertia.z]
        }),
    )
}

/// `G = J M^-1 J'`, symmetrized.
pub fn assemble_delassus(j: &DMatrix<f64>, bodies: &[BodyModel]) -> DMatrix<f64> {
    let m_inv = inverse_mass_diagonal(bodies);
    let mut jm = j.clone();
    for (col, &w) in m_inv.iter().enumerate() {
        jm.column_mut(col).scale_mut(w);
    }
    let g = &jm * j.transpose();
    (&g + g.transpose()) * 0.5
}

/// Normal velocity targets from restitution and Baumgarte stabilization.
///
/// `pre_velocity` holds the contact velocities at the start of the step.
/// Tangential targets are zero.
pub fn compose_target_velocity(patches: &[ContactPatch], pre_velocity: &DVector<f64>, scene: &Scene) -> DVector<f64> {
    let mut target = DVector::zeros(3 * patches.len());
    for (i, patch) in patches.iter().enumerate() {
        let bounce = scene.restitution * (-pre_velocity[3 * i]).max(0.0);
        let push = scene.baumgarte * (-patch.gap).max(0.0);
        target[3 * i] = match scene.target_rule {
            TargetRule::Max => bounce.max(push),
            TargetRule::Sum => bounce + push,
        };
    }
    target
}

/// Semi-implicit position update with the exponential map on orientations.
pub fn integrate_positions(states: &mut [RigidBodyState], velocity: &DVector<f64>, dt: f64) {
    for (b, state) in states.iter_mut().enumerate() {
        let lin = velocity.fixed_rows::<3>(BODY_DOF * b).into_owned();
        let ang = velocity.fixed_rows::<3>(BODY_DOF * b + 3).into_owned();
        state.linear_velocity = lin;
        state.angular_velocity = ang;
        state.position += lin * dt;
        let q = state.orientation * UnitQuaternion::from_scaled_axis(ang * dt);
        state.orientation = UnitQuaternion::new_normalize(q.into_inner());
    }
}

/// Kinetic plus gravitational potential energy.
pub fn mechanical_energy(scene: &Scene, states: &[RigidBodyState]) -> f64 {
    scene
        .bodies
        .iter()
        .zip(states)
        .map(|(m, s)| {
            let w = s.angular_velocity;
            0.5 * m.mass * s.linear_velocity.norm_squared() + 0.5 * w.dot(&m.inertia.component_mul(&w))
                - m.mass * scene.gravity.dot(&s.position)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{detect_contacts, tangent_basis, FeatureId};

    fn cube_scene(z: f64) -> Scene {
        let mut s = Scene::new(0.01);
        s.add_body(BodyModel::cube(1.0, 0.5).unwrap(), RigidBodyState::at_rest(Vector3::new(0.0, 0.0, z)));
        s
    }

    fn patch(point: Vector3<f64>, upper: usize, lower: Option<usize>) -> ContactPatch {
        let (t1, t2) = tangent_basis(&Vector3::z(), 0.0);
        ContactPatch {
            point,
            normal: Vector3::z(),
            t1,
            t2,
            gap: 0.0,
            upper,
            lower,
            feature: FeatureId { body: upper, other: lower, corner: 0 },
        }
    }

    #[test]
    fn free_velocity_examples() {
        let s = cube_scene(0.5);
        let v = compute_free_velocity(&s, &s.initial_states, 0.0, 0.01);
        assert!((v[2] + 0.0981).abs() < 1e-15);

        let mut zero_g = s.clone();
        zero_g.gravity = Vector3::zeros();
        zero_g.initial_states[0].angular_velocity = Vector3::new(0.0, 0.0, 1.0);
        let v = compute_free_velocity(&zero_g, &zero_g.initial_states, 0.0, 0.01);
        assert_eq!(v.rows(3, 3).into_owned(), Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(v.rows(0, 3).into_owned(), Vector3::zeros());
    }

    #[test]
    fn patch_below_the_com_sees_only_vertical_velocity() {
        let s = cube_scene(0.5);
        let j = build_jacobian(&[patch(Vector3::zeros(), 0, None)], &s.initial_states);
        assert_eq!(j.ncols(), 6);
        let expected = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        for (k, e) in expected.iter().enumerate() {
            assert!((j[(0, k)] - e).abs() < 1e-15);
        }
        let g = assemble_delassus(&j, &s.bodies);
        assert!((g[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stacked_patch_has_opposite_blocks() {
        let mut s = cube_scene(0.5);
        s.add_body(BodyModel::cube(1.0, 0.5).unwrap(), RigidBodyState::at_rest(Vector3::new(0.0, 0.0, 1.5)));
        let j = build_jacobian(&[patch(Vector3::new(0.0, 0.0, 1.0), 1, Some(0))], &s.initial_states);
        for k in 0..3 {
            assert!((j[(0, 6 + k)] + j[(0, k)]).abs() < 1e-15);
        }
        assert_eq!(j[(0, 8)], 1.0);
    }

    #[test]
    fn four_corner_delassus_is_rank_deficient() {
        let s = cube_scene(0.5);
        let patches = detect_contacts(&s, &s.initial_states).unwrap();
        let g = assemble_delassus(&build_jacobian(&patches, &s.initial_states), &s.bodies);
        assert_eq!(g.nrows(), 12);
        let sv = g.clone().svd(false, false).singular_values;
        let rank = sv.iter().filter(|&&x| x > 1e-10 * sv.max()).count();
        assert!(rank <= 6, "{rank}");
        assert!((&g - g.transpose()).amax() <= 1e-12);
    }

    #[test]
    fn independent_bodies_give_block_diagonal_delassus() {
        let mut s = cube_scene(0.5);
        s.add_body(BodyModel::cube(2.0, 0.5).unwrap(), RigidBodyState::at_rest(Vector3::new(3.0, 0.0, 0.5)));
        let patches = detect_contacts(&s, &s.initial_states).unwrap();
        let g = assemble_delassus(&build_jacobian(&patches, &s.initial_states), &s.bodies);
        assert_eq!(g.view((0, 12), (12, 12)).amax(), 0.0);
    }

    #[test]
    fn jacobian_reproduces_point_velocities() {
        let mut s = cube_scene(0.5);
        {
            let st = &mut s.initial_states[0];
            st.orientation = UnitQuaternion::from_euler_angles(0.1, -0.2, 0.7);
            st.linear_velocity = Vector3::new(0.3, -1.0, 0.2);
            st.angular_velocity = Vector3::new(0.5, 1.5, -2.0);
        }
        let st = &s.initial_states[0];
        let p = patch(Vector3::new(0.4, -0.3, 0.1), 0, None);
        let j = build_jacobian(&[p], &s.initial_states);
        let v = DVector::from_iterator(6, st.linear_velocity.iter().chain(st.angular_velocity.iter()).copied());
        let c = &j * v;
        let expected = p.frame().transpose() * s.initial_states[0].point_velocity(&p.point);
        assert!((Vector3::new(c[0], c[1], c[2]) - expected).norm() < 1e-12);
    }

    #[test]
    fn target_velocity_rules() {
        let mut s = cube_scene(0.5);
        let mut p = patch(Vector3::zeros(), 0, None);
        let pre = DVector::from_row_slice(&[-2.0, 0.0, 0.0]);
        assert_eq!(compose_target_velocity(&[p], &DVector::zeros(3), &s)[0], 0.0);
        s.restitution = 0.5;
        assert_eq!(compose_target_velocity(&[p], &pre, &s)[0], 1.0);
        s.restitution = 0.0;
        s.baumgarte = 10.0;
        p.gap = -0.01;
        assert!((compose_target_velocity(&[p], &DVector::zeros(3), &s)[0] - 0.1).abs() < 1e-15);
        s.restitution = 0.5;
        s.target_rule = TargetRule::Sum;
        assert!((compose_target_velocity(&[p], &pre, &s)[0] - 1.1).abs() < 1e-15);
    }

    #[test]
    fn energy_examples() {
        let s = cube_scene(0.5);
        assert!((mechanical_energy(&s, &s.initial_states) - 4.905).abs() < 1e-12);
        let mut moving = cube_scene(0.0);
        moving.initial_states[0].linear_velocity = Vector3::x();
        assert!((mechanical_energy(&moving, &moving.initial_states) - 0.5).abs() < 1e-15);
    }
}
