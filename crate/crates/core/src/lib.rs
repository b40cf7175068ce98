//! Regrasp planning for manipulation plans made of constant screw motions.
//!
//! A plan is a sequence of object poses. Each consecutive pair of poses is one
//! screw segment; for each segment the grasp metric marks the points of the
//! object's cloud where a two-finger grasp can apply the needed wrench. The
//! planner then groups consecutive segments whose grasping regions overlap
//! enough to be served by one grasp.

pub mod error;
pub mod linalg;
pub mod scalar;
pub mod screws;
pub mod cloud;
pub mod lpsolve;
pub mod metric;
pub mod oracle;
pub mod regrasp;
pub mod synth;
pub mod plan;
pub mod pipeline;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Vec3f = linalg::Vec3<f32>;
pub type Vec3d = linalg::Vec3<f64>;
pub type Pose32 = screws::Pose<f32>;
pub type Pose64 = screws::Pose<f64>;
pub type Screw32 = screws::UnitScrew<f32>;
pub type Screw64 = screws::UnitScrew<f64>;
pub type Cloud32 = cloud::PointCloud<f32>;
pub type Cloud64 = cloud::PointCloud<f64>;
