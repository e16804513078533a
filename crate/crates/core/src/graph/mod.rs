//! Radius-graph construction and the graph network simulator forward pass:
//! encode, message passing with residual connections, decode to per-particle
//! accelerations, Euler update.

mod build;
mod features;
mod model;

pub use build::build_graph;
pub use features::{build_features, FeatureContext, GraphInputs};
pub use model::{euler_update, gns_forward, GnsModel, GnsParams, Interaction, ModelConfig};
