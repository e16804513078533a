//! Dataset manifest and parallel seeded generation.
//!
//! The manifest is a human-readable JSON file listing member trajectories and
//! the dataset-level normalization statistics. The statistics are canonical:
//! per-trajectory accumulation merged in file order, which `rescan_stats`
//! reproduces bitwise.

use super::boundary::add_boundary_particles;
use super::scaling::{ScaledBounds, Scaling};
use super::stats::NormStats;
use super::trajectory::Trajectory;
use crate::flip::{simulate_trajectory, SceneSpec, SimConfig};
use crate::rng::{derive_seed, stream};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const MANIFEST_NAME: &str = "manifest.json";
const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub domain: (usize, usize),
    pub dt: f64,
    /// True when walls are represented as obstacle particles in the files.
    pub boundary_particles: bool,
    pub scaled_bounds: ScaledBounds,
    pub scene_spec: SceneSpec,
    pub sim_config: SimConfig,
    pub seed: u64,
    pub files: Vec<String>,
    pub stats: NormStats,
}

impl DatasetManifest {
    pub fn save(&self, dir: &Path) -> Result<()> {
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(format!("manifest encode: {e}")))?;
        std::fs::write(dir.join(MANIFEST_NAME), body)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path)?;
        let manifest: DatasetManifest = serde_json::from_str(&body)
            .map_err(|e| Error::Format(format!("manifest decode: {e}")))?;
        if manifest.version != MANIFEST_VERSION {
            return Err(Error::Format(format!(
                "unsupported manifest version {}",
                manifest.version
            )));
        }
        Ok(manifest)
    }
}

/// A manifest together with its loaded member trajectories.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub trajectories: Vec<Trajectory>,
    pub dir: PathBuf,
}

impl Dataset {
    /// Load every member of a manifest. `path` may be the manifest file or
    /// its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let (dir, manifest_path) = if path.is_dir() {
            (path.to_path_buf(), path.join(MANIFEST_NAME))
        } else {
            (
                path.parent().unwrap_or(Path::new(".")).to_path_buf(),
                path.to_path_buf(),
            )
        };
        let manifest = DatasetManifest::load(&manifest_path)?;
        let trajectories = manifest
            .files
            .iter()
            .map(|f| Trajectory::read_from(&dir.join(f)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            manifest,
            trajectories,
            dir,
        })
    }

    /// Recompute the statistics with the canonical procedure.
    pub fn rescan_stats(&self) -> NormStats {
        let mut stats = NormStats::default();
        for traj in &self.trajectories {
            stats.merge(&NormStats::for_trajectory(traj));
        }
        stats
    }
}

#[derive(Debug, Clone)]
pub struct GenOptions {
    pub trajectories: usize,
    pub seed: u64,
    pub scene: SceneSpec,
    pub sim: SimConfig,
    pub boundary_particles: bool,
    /// Wall particle spacing in grid units.
    pub boundary_spacing: f64,
}

/// Generate `n` seeded trajectories in parallel, accumulate statistics
/// online, and write the manifest. Deterministic for a given options struct.
pub fn generate_dataset(dir: &Path, opts: &GenOptions) -> Result<DatasetManifest> {
    std::fs::create_dir_all(dir)?;
    let results: Vec<Result<(String, NormStats)>> = (0..opts.trajectories)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(opts.seed, stream::INIT, i as u64);
            let mut traj = simulate_trajectory(seed, &opts.scene, &opts.sim)?;
            if opts.boundary_particles {
                traj = add_boundary_particles(&traj, opts.boundary_spacing);
            }
            traj.validate()?;
            let name = format!("traj_{i:04}.bin");
            traj.write_to(&dir.join(&name))?;
            Ok((name, NormStats::for_trajectory(&traj)))
        })
        .collect();

    let mut files = Vec::with_capacity(opts.trajectories);
    let mut stats = NormStats::default();
    for r in results {
        let (name, s) = r?;
        files.push(name);
        stats.merge(&s);
    }
    let manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        domain: opts.scene.domain,
        dt: opts.scene.dt,
        boundary_particles: opts.boundary_particles,
        scaled_bounds: Scaling::new(opts.scene.domain).bounds(),
        scene_spec: opts.scene.clone(),
        sim_config: opts.sim.clone(),
        seed: opts.seed,
        files,
        stats,
    };
    manifest.save(dir)?;
    Ok(manifest)
}
