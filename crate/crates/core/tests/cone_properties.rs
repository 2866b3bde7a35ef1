use contactbench_core::cone::de_saxce_correction;
use contactbench_core::FrictionCone;
use nalgebra::{Vector2, Vector3};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn vec3() -> impl Strategy<Value = Vector3<f64>> {
    (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b, c)| Vector3::new(a, b, c))
}

fn mu() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 0.05..2.0f64]
}

fn in_cone(mu: f64) -> impl Strategy<Value = Vector3<f64>> {
    (0.0..10.0f64, 0.0..1.0f64, 0.0..std::f64::consts::TAU)
        .prop_map(move |(n, r, a)| Vector3::new(n, mu * n * r * a.cos(), mu * n * r * a.sin()))
}

proptest! {
    #[test]
    fn projection_lands_in_the_cone_and_is_idempotent(mu in mu(), x in vec3()) {
        let cone = FrictionCone::new(mu);
        let p = cone.project(&x);
        prop_assert!(cone.contains(&p));
        prop_assert!((cone.project(&p) - p).amax() <= TOL * (1.0 + p.amax()));
    }

    #[test]
    fn projection_is_nonexpansive(mu in mu(), x in vec3(), y in vec3()) {
        let cone = FrictionCone::new(mu);
        prop_assert!((cone.project(&x) - cone.project(&y)).norm() <= (x - y).norm() + TOL);
    }

    #[test]
    fn projection_satisfies_the_variational_inequality((mu, y) in mu().prop_flat_map(|m| (Just(m), in_cone(m))), x in vec3()) {
        let cone = FrictionCone::new(mu);
        let p = cone.project(&x);
        prop_assert!((x - p).dot(&(y - p)) <= TOL * (1.0 + x.norm() * y.norm()));
    }

    #[test]
    fn moreau_decomposition_holds(mu in 0.05..2.0f64, x in vec3()) {
        let cone = FrictionCone::new(mu);
        let p = cone.project(&x);
        let q = cone.project_dual(&(-x));
        prop_assert!((x - (p - q)).amax() <= 1e-9 * (1.0 + x.amax()));
        prop_assert!(p.dot(&q).abs() <= 1e-9 * (1.0 + x.norm_squared()));
    }

    #[test]
    fn distance_is_zero_inside_and_matches_projection(mu in mu(), x in vec3()) {
        let cone = FrictionCone::new(mu);
        prop_assert!((cone.distance(&x) - (x - cone.project(&x)).norm()).abs() <= TOL);
        prop_assert!(cone.distance(&cone.project(&x)) <= TOL);
    }

    #[test]
    fn dual_distance_matches_a_grid_search(mu in 0.2..1.5f64, x in vec3()) {
        let cone = FrictionCone::new(mu);
        let d = cone.dual_distance(&x);
        let mut best = f64::INFINITY;
        for i in 0..=60 {
            let n = 20.0 * i as f64 / 60.0;
            for k in 0..=40 {
                for j in 0..72 {
                    let r = n / mu * k as f64 / 40.0;
                    let a = std::f64::consts::TAU * j as f64 / 72.0;
                    best = best.min((x - Vector3::new(n, r * a.cos(), r * a.sin())).norm());
                }
            }
        }
        prop_assert!(d <= best + 1e-9);
        prop_assert!(best - d <= 0.6, "grid {best} exact {d}");
    }

    #[test]
    fn horizontal_projection_keeps_direction_and_radius(mu in mu(), n in 0.0..5.0f64, t in (-5.0..5.0f64, -5.0..5.0f64)) {
        let cone = FrictionCone::new(mu);
        let t = Vector2::new(t.0, t.1);
        let p = cone.project_horizontal(n, &t);
        prop_assert!(p.norm() <= mu * n + TOL);
        prop_assert!(t.x * p.y - t.y * p.x <= TOL * (1.0 + t.norm()));
        prop_assert!(t.dot(&p) >= -TOL);
    }

    #[test]
    fn pyramid_clamp_is_within_sqrt_two_of_the_disk(mu in mu(), n in 0.0..5.0f64, t in (-5.0..5.0f64, -5.0..5.0f64)) {
        let cone = FrictionCone::new(mu);
        let p = cone.clamp_pyramid(n, &Vector2::new(t.0, t.1));
        prop_assert!(p.amax() <= mu * n + TOL);
        prop_assert!(p.norm() <= std::f64::consts::SQRT_2 * mu * n + TOL);
        prop_assert!(cone.pyramid_contains(&Vector3::new(n, p.x, p.y)));
    }

    #[test]
    fn de_saxce_shift_is_dual_feasible_iff_normal_velocity_is_nonnegative(mu in 0.05..2.0f64, c in vec3()) {
        let cone = FrictionCone::new(mu);
        let s = c + de_saxce_correction(&c, mu);
        prop_assert_eq!((s.y, s.z), (c.y, c.z));
        let feasible = cone.dual_distance(&s) <= 1e-9 * (1.0 + c.norm());
        prop_assert!(feasible == (c.x >= -1e-9 * (1.0 + c.norm())) || c.x.abs() < 1e-6);
    }
}

#[test]
fn frictionless_cone_is_the_normal_ray() {
    let cone = FrictionCone::frictionless();
    let p = cone.project(&Vector3::new(2.0, 3.0, -4.0));
    assert_eq!(p, Vector3::new(2.0, 0.0, 0.0));
    assert!(cone.dual_distance(&Vector3::new(1.0, 5.0, -5.0)) < TOL);
}
