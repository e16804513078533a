//! Desk-scale pipeline for learning particle fluid dynamics: a 2D FLIP solver
//! generates trajectory datasets, a graph network simulator (GNS) is trained on
//! them under several loss variants, and rollouts are scored with MSE- and
//! optimal-transport-based metrics.

pub mod data;
pub mod error;
pub mod eval;
pub mod flip;
pub mod graph;
pub mod rng;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};

/// 2D point / vector carried as a plain array; all positions and velocities
/// use this.
pub type Vec2 = [f64; 2];

/// Particle material tag. Obstacle particles are static; only fluid particles
/// are simulated, predicted and scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ParticleType {
    Fluid,
    Obstacle,
}

impl ParticleType {
    pub fn index(self) -> usize {
        match self {
            ParticleType::Fluid => 0,
            ParticleType::Obstacle => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(ParticleType::Fluid),
            1 => Some(ParticleType::Obstacle),
            _ => None,
        }
    }
}
