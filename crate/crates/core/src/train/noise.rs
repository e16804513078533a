//! Random-walk input corruption: i.i.d. per-step velocity perturbations
//! accumulated over the five history steps, so the newest position carries
//! the full accumulated standard deviation.

use crate::{ParticleType, Vec2};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub enabled: bool,
    /// Std of the accumulated perturbation at the newest position, scaled
    /// units per axis.
    pub accumulated_position_std: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            enabled: false,
            accumulated_position_std: 6.7e-4,
        }
    }
}

/// Corrupt a six-frame window in place. Fluid particles only; a zero std is
/// an exact no-op (no RNG draws). The oldest frame stays fixed and each later
/// frame adds a fresh velocity perturbation, random-walk style.
pub fn inject_noise(
    window: &mut [Vec<Vec2>; 6],
    types: &[ParticleType],
    cfg: &NoiseConfig,
    rng: &mut ChaCha8Rng,
) {
    if !cfg.enabled || cfg.accumulated_position_std == 0.0 {
        return;
    }
    let step_std = cfg.accumulated_position_std / (5.0f64).sqrt();
    let normal = Normal::new(0.0, step_std).expect("finite std");
    for (i, t) in types.iter().enumerate() {
        if *t != ParticleType::Fluid {
            continue;
        }
        let mut cum = [0.0f64, 0.0];
        for frame in window.iter_mut().skip(1) {
            cum[0] += normal.sample(rng);
            cum[1] += normal.sample(rng);
            frame[i][0] += cum[0];
            frame[i][1] += cum[1];
        }
    }
}
