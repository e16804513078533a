//! Trajectory persistence, position scaling, online normalization statistics,
//! finite-difference kinematics, and the boundary-particle dataset variant.

mod boundary;
mod kinematics;
mod manifest;
mod scaling;
mod stats;
mod trajectory;

pub use boundary::add_boundary_particles;
pub use kinematics::finite_difference_kinematics;
pub use manifest::{generate_dataset, Dataset, DatasetManifest, GenOptions, MANIFEST_NAME};
pub use scaling::{ScaledBounds, Scaling};
pub use stats::{denormalize, normalize, AxisStats, NormStats};
pub use trajectory::Trajectory;
