//! Forward 2D FLIP fluid solver on a MAC grid plus the randomized scene
//! generator used to produce ground-truth trajectories.

mod grid;
mod pressure;
mod scene;
mod sim;

pub use grid::{CellFlag, MacGrid};
pub use pressure::{pressure_project, PressureStats};
pub use scene::{generate_scene, Scene};
pub use sim::{flip_step, simulate_raw, simulate_trajectory, RawTrajectory};

use crate::{Error, ParticleType, Result, Vec2};
use serde::{Deserialize, Serialize};

/// Positions, velocities and material tags of all particles at one instant.
/// Positions are in grid units.
#[derive(Debug, Clone, Default)]
pub struct ParticleState {
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
    pub types: Vec<ParticleType>,
}

impl ParticleState {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn fluid_indices(&self) -> Vec<usize> {
        self.types
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == ParticleType::Fluid)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Randomized scene distribution: pools, liquid blocks, rotated obstacles.
/// Ranges are inclusive; whether a feature appears is governed by its
/// probability. Block count falls back to a single block when the multi-block
/// draw fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub domain: (usize, usize),
    pub steps: usize,
    pub dt: f64,
    pub max_particles: usize,
    pub pool_probability: f64,
    pub pool_height: (u32, u32),
    pub block_size: (u32, u32),
    pub multi_block_probability: f64,
    pub block_count: (u32, u32),
    pub obstacle_probability: f64,
    pub obstacle_count: (u32, u32),
    pub obstacle_length: (f64, f64),
    /// Degrees.
    pub obstacle_rotation: (f64, f64),
    pub initial_velocity_probability: f64,
    pub initial_velocity: (f64, f64),
}

impl SceneSpec {
    /// Full-scale generation distribution on a 32x32 domain.
    pub fn standard() -> Self {
        SceneSpec {
            domain: (32, 32),
            steps: 400,
            dt: 0.05,
            max_particles: 1300,
            pool_probability: 0.3,
            pool_height: (3, 8),
            block_size: (2, 20),
            multi_block_probability: 0.3,
            block_count: (2, 3),
            obstacle_probability: 0.8,
            obstacle_count: (1, 5),
            obstacle_length: (2.0, 20.0),
            obstacle_rotation: (0.0, 90.0),
            initial_velocity_probability: 0.3,
            initial_velocity: (-5.0, 5.0),
        }
    }

    /// Small scenes and short trajectories for fast desk-scale runs.
    pub fn desk() -> Self {
        SceneSpec {
            domain: (32, 32),
            steps: 100,
            dt: 0.05,
            max_particles: 320,
            pool_probability: 0.3,
            pool_height: (2, 3),
            block_size: (2, 5),
            multi_block_probability: 0.3,
            block_count: (2, 3),
            obstacle_probability: 0.8,
            obstacle_count: (1, 3),
            obstacle_length: (2.0, 10.0),
            obstacle_rotation: (0.0, 90.0),
            initial_velocity_probability: 0.3,
            initial_velocity: (-5.0, 5.0),
        }
    }

    /// The same distribution on a double-height domain.
    pub fn tall(mut self) -> Self {
        self.domain = (self.domain.0, self.domain.1 * 2);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ranges_ok = self.pool_height.0 <= self.pool_height.1
            && self.block_size.0 <= self.block_size.1
            && self.block_count.0 <= self.block_count.1
            && self.obstacle_count.0 <= self.obstacle_count.1
            && self.obstacle_length.0 <= self.obstacle_length.1
            && self.obstacle_rotation.0 <= self.obstacle_rotation.1
            && self.initial_velocity.0 <= self.initial_velocity.1;
        if !ranges_ok {
            return Err(Error::Contract("scene spec range with lower > upper".into()));
        }
        for p in [
            self.pool_probability,
            self.multi_block_probability,
            self.obstacle_probability,
            self.initial_velocity_probability,
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Contract(format!("probability {p} outside [0,1]")));
            }
        }
        if self.domain.0 == 0 || self.domain.1 == 0 {
            return Err(Error::Contract("empty domain".into()));
        }
        if self.steps < 7 {
            return Err(Error::Contract("trajectories need at least 7 frames".into()));
        }
        Ok(())
    }
}

/// Solver constants. These are artifact choices, surfaced here so data
/// generation is reproducible from the config alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Grid units / s^2.
    pub gravity: Vec2,
    /// 1.0 = pure FLIP, 0.0 = pure PIC.
    pub flip_blend: f64,
    /// Per-fluid-cell divergence bound after projection.
    pub pressure_tolerance: f64,
    pub max_pressure_iterations: usize,
    /// Seeded as a k x k pattern per fluid cell; must be a perfect square.
    pub particles_per_cell: usize,
    /// Seed jitter as a fraction of the sub-cell spacing.
    pub seed_jitter: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            gravity: [0.0, -9.81],
            flip_blend: 0.97,
            pressure_tolerance: 1e-6,
            max_pressure_iterations: 600,
            particles_per_cell: 4,
            seed_jitter: 0.25,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.flip_blend) {
            return Err(Error::Contract(format!(
                "flip_blend {} outside [0,1]",
                self.flip_blend
            )));
        }
        let k = (self.particles_per_cell as f64).sqrt() as usize;
        if k * k != self.particles_per_cell || self.particles_per_cell == 0 {
            return Err(Error::Contract(format!(
                "particles_per_cell {} is not a positive perfect square",
                self.particles_per_cell
            )));
        }
        if self.pressure_tolerance <= 0.0 {
            return Err(Error::Contract("pressure_tolerance must be positive".into()));
        }
        Ok(())
    }
}
