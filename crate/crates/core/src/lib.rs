//! Two-phase pure proportional navigation: engagement simulation,
//! exhaustive gain sweeps and small feedforward surrogates for the
//! optimal-gain manifold.

pub mod error;
pub mod guidance;
pub mod kinematics;
pub mod simulation;
pub mod sweep;
pub mod mlp;
