//! Profile presets and the TOML run-config file. A config file supplies whole
//! sections; a section that is present replaces the profile default for that
//! section entirely.

use crate::Profile;
use flipgns::data::GenOptions;
use flipgns::flip::{SceneSpec, SimConfig};
use flipgns::graph::ModelConfig;
use flipgns::tensor::LrSchedule;
use flipgns::train::{NoiseConfig, TrainConfig};
use flipgns::{Error, Result};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scene: Option<SceneSpec>,
    pub sim: Option<SimConfig>,
    pub model: Option<ModelConfig>,
    pub train: Option<TrainSection>,
    pub noise: Option<NoiseConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub batch_size: usize,
    pub total_steps: u64,
    pub checkpoint_interval: u64,
    pub lr_start: f64,
    pub lr_floor: f64,
    pub decay_steps: u64,
    #[serde(default = "default_unroll")]
    pub unroll_steps: usize,
}

fn default_unroll() -> usize {
    1
}

/// Everything a run needs, resolved from profile + optional file.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scene: SceneSpec,
    pub sim: SimConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub unroll_steps: usize,
    pub noise: Option<NoiseConfig>,
    pub gen_trajectories: usize,
}

pub fn resolve(profile: Profile, config_path: Option<&Path>) -> Result<Resolved> {
    let (scene, model, total_steps, gen_trajectories) = match profile {
        Profile::Desk => (SceneSpec::desk(), ModelConfig::desk(), 10_000, 20),
        Profile::Paper => (SceneSpec::standard(), ModelConfig::full(), 500_000, 2000),
    };
    let mut resolved = Resolved {
        scene,
        sim: SimConfig::default(),
        model,
        train: TrainConfig {
            total_steps,
            ..TrainConfig::default()
        },
        unroll_steps: 1,
        noise: None,
        gen_trajectories,
    };
    if let Some(path) = config_path {
        let body = std::fs::read_to_string(path)?;
        let file: FileConfig = toml::from_str(&body)
            .map_err(|e| Error::Contract(format!("config file {}: {e}", path.display())))?;
        if let Some(scene) = file.scene {
            resolved.scene = scene;
        }
        if let Some(sim) = file.sim {
            resolved.sim = sim;
        }
        if let Some(model) = file.model {
            resolved.model = model;
        }
        if let Some(train) = file.train {
            resolved.train = TrainConfig {
                batch_size: train.batch_size,
                schedule: LrSchedule {
                    lr_start: train.lr_start,
                    lr_floor: train.lr_floor,
                    decay_steps: train.decay_steps,
                },
                total_steps: train.total_steps,
                seed: 0,
                checkpoint_interval: train.checkpoint_interval,
            };
            resolved.unroll_steps = train.unroll_steps;
        }
        resolved.noise = file.noise;
    }
    resolved.scene.validate()?;
    resolved.sim.validate()?;
    Ok(resolved)
}

impl Resolved {
    pub fn gen_options(&self, seed: u64, boundary_particles: bool, trajectories: Option<usize>) -> GenOptions {
        GenOptions {
            trajectories: trajectories.unwrap_or(self.gen_trajectories),
            seed,
            scene: self.scene.clone(),
            sim: self.sim.clone(),
            boundary_particles,
            boundary_spacing: 1.0,
        }
    }
}

/// Refuse to clobber an existing non-empty directory unless forced.
pub fn prepare_out_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        let non_empty = std::fs::read_dir(dir)?.next().is_some();
        if non_empty && !force {
            return Err(Error::Contract(format!(
                "output directory {} is not empty (pass --force to overwrite)",
                dir.display()
            )));
        }
    }
    std::fs::create_dir_all(dir)?;
    Ok(())
}
