//! Origami variable-friction (O-VF) finger surfaces and a quasi-static
//! simulator of a two-finger, two-DOF gripper using them.

pub mod actuation;
pub mod error;
pub mod export;
pub mod fold_geometry;
pub mod harness;
pub mod materials;
pub mod plans;
pub mod sim;

pub use error::{Error, Result};
pub use fold_geometry::{FoldParameters, FrictionMode};
