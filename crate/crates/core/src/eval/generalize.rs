//! Domain-generalization experiment: models trained on square domains roll
//! out on double-height scenes. Wall-distance models measure distances to the
//! extended walls; boundary-particle models get wall particles along the
//! extended walls instead.

use super::metrics::emd_samples;
use super::rollout::rollout;
use crate::data::{add_boundary_particles, Trajectory};
use crate::graph::GnsModel;
use crate::{Result, Vec2};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct GeneralizationScene {
    pub scene: String,
    /// Per model: (name, per-step EMD samples).
    pub emd_curves: Vec<(String, Vec<(usize, f64)>)>,
    /// Predicted frames per model, for rendering.
    #[serde(skip)]
    pub rollouts: Vec<(String, Vec<Vec<Vec2>>)>,
    /// The trajectory representation each model was evaluated against.
    #[serde(skip)]
    pub eval_trajectories: Vec<Trajectory>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneralizationReport {
    pub scenes: Vec<GeneralizationScene>,
    /// Scaled-unit height of the original (training) domain, for overlays.
    pub original_domain_top: f64,
}

/// Roll every model out on every tall scene. `tall` holds plain (no wall
/// particles) trajectories; models without wall-distance features get the
/// boundary-augmented representation automatically.
pub fn generalization_experiment(
    models: &[(&str, &GnsModel)],
    tall: &[Trajectory],
    emd_every: usize,
) -> Result<GeneralizationReport> {
    let mut scenes = Vec::new();
    for (idx, traj) in tall.iter().enumerate() {
        let mut emd_curves = Vec::new();
        let mut rollouts = Vec::new();
        let mut eval_trajectories = Vec::new();
        for (name, model) in models {
            let eval_traj = if model.gns.config.boundary_features {
                traj.clone()
            } else {
                add_boundary_particles(traj, 1.0)
            };
            let adjusted = (*model).clone().with_bounds(eval_traj.bounds());
            let steps = eval_traj.len() - 6;
            let result = rollout(&adjusted, &eval_traj, steps)?;
            let curve = emd_samples(&result.frames, &eval_traj, 0, emd_every)?;
            emd_curves.push((name.to_string(), curve));
            rollouts.push((name.to_string(), result.frames));
            eval_trajectories.push(eval_traj);
        }
        scenes.push(GeneralizationScene {
            scene: format!("tall_{idx:02}"),
            emd_curves,
            rollouts,
            eval_trajectories,
        });
    }
    Ok(GeneralizationReport {
        scenes,
        // the training domain spans [0.1, 0.9] in y; tall scenes extend above
        original_domain_top: 0.9,
    })
}

impl GeneralizationReport {
    pub fn write_emd_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "scene,model,step,emd")?;
        for scene in &self.scenes {
            for (model, curve) in &scene.emd_curves {
                for (step, value) in curve {
                    writeln!(w, "{},{model},{step},{value:.12e}", scene.scene)?;
                }
            }
        }
        Ok(())
    }
}
