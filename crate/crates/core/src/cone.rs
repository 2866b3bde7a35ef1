//! Coulomb friction cones and the projections used by the contact solvers.
//!
//! Every per-contact vector is ordered `(N, T1, T2)`: the normal component
//! first, then the two tangential components in the contact tangent basis.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

/// Slack used by membership tests on the cone boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Second-order friction cone `K_mu = { l | l_N >= 0, |l_T| <= mu l_N }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrictionCone {
    pub mu: f64,
}

impl FrictionCone {
    pub fn new(mu: f64) -> Self {
        assert!(mu >= 0.0 && mu.is_finite(), "friction coefficient must be finite and >= 0");
        Self { mu }
    }

    pub fn frictionless() -> Self {
        Self { mu: 0.0 }
    }

    /// `true` iff `lam` lies in the cone, up to [`BOUNDARY_TOL`].
    pub fn contains(&self, lam: &Vector3<f64>) -> bool {
        lam[0] >= -BOUNDARY_TOL && tangential(lam).norm() <= self.mu * lam[0] + BOUNDARY_TOL
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, x: &Vector3<f64>) -> Vector3<f64> {
        project_onto_cone(self.mu, x)
    }

    /// Euclidean projection onto the dual cone `K_{1/mu}`.
    ///
    /// For `mu = 0` the dual cone is the half-space `{ c_N >= 0 }`.
    pub fn project_dual(&self, x: &Vector3<f64>) -> Vector3<f64> {
        if self.mu == 0.0 {
            Vector3::new(x[0].max(0.0), x[1], x[2])
        } else {
            project_onto_cone(1.0 / self.mu, x)
        }
    }

    pub fn distance(&self, x: &Vector3<f64>) -> f64 {
        (x - self.project(x)).norm()
    }

    pub fn dual_distance(&self, x: &Vector3<f64>) -> f64 {
        (x - self.project_dual(x)).norm()
    }

    /// Scales `lam_t` back onto the disk of radius `mu * lam_n` when it lies outside.
    pub fn project_horizontal(&self, lam_n: f64, lam_t: &Vector2<f64>) -> Vector2<f64> {
        let radius = self.mu * lam_n.max(0.0);
        let norm = lam_t.norm();
        if norm <= radius {
            *lam_t
        } else if norm == 0.0 {
            Vector2::zeros()
        } else {
            lam_t * (radius / norm)
        }
    }

    /// Componentwise clamp of `lam_t` to `[-mu lam_n, mu lam_n]` (four-facet pyramid).
    pub fn clamp_pyramid(&self, lam_n: f64, lam_t: &Vector2<f64>) -> Vector2<f64> {
        let bound = self.mu * lam_n.max(0.0);
        lam_t.map(|t| t.clamp(-bound, bound))
    }

    /// `true` iff `lam` lies in the four-facet pyramid aligned with the tangent basis.
    pub fn pyramid_contains(&self, lam: &Vector3<f64>) -> bool {
        let bound = self.mu * lam[0] + BOUNDARY_TOL;
        lam[0] >= -BOUNDARY_TOL && lam[1].abs() <= bound && lam[2].abs() <= bound
    }
}

/// Free-function form of [`FrictionCone::contains`].
pub fn cone_contains(cone: &FrictionCone, lam: &Vector3<f64>) -> bool {
    cone.contains(lam)
}

/// Free-function form of [`FrictionCone::project`].
pub fn project_soc(cone: &FrictionCone, x: &Vector3<f64>) -> Vector3<f64> {
    cone.project(x)
}

/// Free-function form of [`FrictionCone::project_horizontal`].
pub fn project_horizontal(cone: &FrictionCone, lam_n: f64, lam_t: &Vector2<f64>) -> Vector2<f64> {
    cone.project_horizontal(lam_n, lam_t)
}

/// Free-function form of [`FrictionCone::clamp_pyramid`].
pub fn clamp_pyramid(cone: &FrictionCone, lam_n: f64, lam_t: &Vector2<f64>) -> Vector2<f64> {
    cone.clamp_pyramid(lam_n, lam_t)
}

/// De Saxcé velocity shift `(mu |c_T|; 0, 0)`.
pub fn de_saxce_correction(c: &Vector3<f64>, mu: f64) -> Vector3<f64> {
    Vector3::new(mu * tangential(c).norm(), 0.0, 0.0)
}

#[inline]
pub fn tangential(v: &Vector3<f64>) -> Vector2<f64> {
    Vector2::new(v[1], v[2])
}

fn project_onto_cone(aperture: f64, x: &Vector3<f64>) -> Vector3<f64> {
    let n = x[0];
    let t = tangential(x);
    let s = t.norm();
    if s <= aperture * n {
        return *x;
    }
    // polar cone: { |t| <= -n / aperture }
    if aperture * s <= -n {
        return Vector3::zeros();
    }
    let n_proj = (n + aperture * s) / (1.0 + aperture * aperture);
    if s == 0.0 {
        return Vector3::new(n_proj, 0.0, 0.0);
    }
    let scale = aperture * n_proj / s;
    Vector3::new(n_proj, t[0] * scale, t[1] * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v3(a: f64, b: f64, c: f64) -> Vector3<f64> {
        Vector3::new(a, b, c)
    }

    #[test]
    fn membership_examples() {
        let cone = FrictionCone::new(0.5);
        assert!(cone.contains(&v3(1.0, 0.2, 0.0)));
        assert!(cone.contains(&v3(1.0, 0.5, 0.0)));
        assert!(!cone.contains(&v3(1.0, 0.8, 0.0)));
    }

    #[test]
    fn frictionless_cone_is_a_ray() {
        let cone = FrictionCone::frictionless();
        assert!(cone.contains(&v3(2.0, 0.0, 0.0)));
        assert!(!cone.contains(&v3(2.0, 1e-6, 0.0)));
        assert_eq!(cone.project(&v3(2.0, 3.0, -1.0)), v3(2.0, 0.0, 0.0));
        assert_eq!(cone.project(&v3(-2.0, 3.0, -1.0)), Vector3::zeros());
        assert_eq!(cone.project_dual(&v3(-2.0, 3.0, -1.0)), v3(0.0, 3.0, -1.0));
    }

    #[test]
    fn soc_projection_examples() {
        let cone = FrictionCone::new(0.5);
        assert_eq!(cone.project(&v3(1.0, 0.2, 0.0)), v3(1.0, 0.2, 0.0));
        assert_eq!(cone.project(&v3(-2.0, 0.5, 0.0)), Vector3::zeros());
        let p = cone.project(&v3(1.0, 2.0, 0.0));
        assert!((p - v3(1.6, 0.8, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn horizontal_projection_examples() {
        let cone = FrictionCone::new(0.5);
        let p = cone.project_horizontal(1.0, &Vector2::new(0.3, 0.0));
        assert_eq!(p, Vector2::new(0.3, 0.0));
        let p = cone.project_horizontal(1.0, &Vector2::new(2.0, 0.0));
        assert_eq!(p, Vector2::new(0.5, 0.0));
        let p = cone.project_horizontal(0.0, &Vector2::new(1.0, 1.0));
        assert_eq!(p, Vector2::zeros());
    }

    #[test]
    fn pyramid_clamp_examples() {
        let cone = FrictionCone::new(0.5);
        assert_eq!(cone.clamp_pyramid(1.0, &Vector2::new(2.0, 0.0)), Vector2::new(0.5, 0.0));
        let corner = cone.clamp_pyramid(1.0, &Vector2::new(1.414, 1.414));
        assert_eq!(corner, Vector2::new(0.5, 0.5));
        assert!((corner.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(!cone.contains(&v3(1.0, corner[0], corner[1])));
        assert_eq!(cone.clamp_pyramid(1.0, &Vector2::new(0.1, -0.1)), Vector2::new(0.1, -0.1));
    }

    #[test]
    fn de_saxce_examples() {
        assert!((de_saxce_correction(&v3(0.6, -1.5, 0.0), 0.5) - v3(0.75, 0.0, 0.0)).norm() < 1e-15);
        assert_eq!(de_saxce_correction(&v3(1.0, 0.0, 0.0), 0.9), Vector3::zeros());
        assert!((de_saxce_correction(&v3(0.0, 3.0, 4.0), 0.2) - v3(1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    #[should_panic]
    fn negative_friction_rejected() {
        FrictionCone::new(-0.1);
    }
}
