//! Box-and-floor rigid-body stepping with frictional contacts.
//!
//! Each step detects corner contacts, assembles the contact problem
//! `(G, g, mu, R)` and hands it to a solver from `contactbench-core`, then
//! applies the impulses with semi-implicit Euler.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod body;
pub mod contact;
pub mod dynamics;
pub mod error;
pub mod scene;
pub mod step;

pub use body::{BodyModel, RigidBodyState};
pub use contact::{detect_contacts, tangent_basis, ContactPatch, FeatureId};
pub use dynamics::{
    assemble_delassus, build_jacobian, compose_target_velocity, compute_free_velocity, mechanical_energy,
};
pub use error::{Result, SimError};
pub use scene::{ExternalForce, PairFriction, Scene, SceneFile, TargetRule};
pub use step::{advance, assemble_problem, step_scene, Simulation, StepOutput, WarmCache};
