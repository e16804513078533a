//! Autoregressive rollouts, the four evaluation metrics (one-step
//! acceleration MSE, 20-step and full-rollout position MSE, earth mover's
//! distance via exact optimal transport), neighbor-distribution analysis,
//! checkpoint screening, and the domain-generalization experiment.

mod emd;
mod generalize;
mod metrics;
mod neighbors;
mod render;
mod report;
mod rollout;
mod screening;

pub use emd::{emd, solve_assignment, TransportPlan, TransportProblem};
pub use generalize::{generalization_experiment, GeneralizationReport, GeneralizationScene};
pub use metrics::{emd_samples, mse_20, mse_400, mse_acc_1, normalized_gt_acceleration, Mse400};
pub use neighbors::{neighbor_stats, NeighborAnalysis};
pub use render::render_frame;
pub use report::{evaluate_model, MetricReport, TrajectoryMetrics};
pub use rollout::{rollout, rollout_segment, GtOracle, RolloutResult, StepModel, ZeroAcceleration};
pub use screening::{argmin_mse_400, select_checkpoint, validation_mse_400};
