//! The five training variants: one-step loss with and without input noise,
//! the unrolled loss from scratch and from pretrained weights, and the
//! boundary-particle variant.

mod checkpoint;
mod loss;
mod noise;
mod trainer;

pub use checkpoint::Checkpoint;
pub use loss::{multi_step_loss, one_step_loss, sq_mean_diff, unrolled_loss};
pub use noise::{inject_noise, NoiseConfig};
pub use trainer::{init_from_pretrained, train, MemorySink, RunDirSink, StepRecord, TrainSink};

use crate::tensor::LrSchedule;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// The five training schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrainVariant {
    /// 1s: plain one-step loss.
    OneStep,
    /// 1sn: one-step loss with input noise.
    OneStepNoise,
    /// 1snb: input noise, walls as obstacle particles, no wall-distance features.
    OneStepNoiseBounded,
    /// 2ss: unrolled loss from scratch.
    TwoStepScratch,
    /// 2si: unrolled loss initialized from pretrained one-step weights.
    TwoStepInitialized,
}

impl TrainVariant {
    pub fn short_name(self) -> &'static str {
        match self {
            TrainVariant::OneStep => "1s",
            TrainVariant::OneStepNoise => "1sn",
            TrainVariant::OneStepNoiseBounded => "1snb",
            TrainVariant::TwoStepScratch => "2ss",
            TrainVariant::TwoStepInitialized => "2si",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "1s" => TrainVariant::OneStep,
            "1sn" => TrainVariant::OneStepNoise,
            "1snb" => TrainVariant::OneStepNoiseBounded,
            "2ss" => TrainVariant::TwoStepScratch,
            "2si" => TrainVariant::TwoStepInitialized,
            other => {
                return Err(Error::Contract(format!(
                    "unknown variant `{other}` (expected 1s, 1sn, 1snb, 2ss, 2si)"
                )))
            }
        })
    }

    pub fn uses_noise(self) -> bool {
        matches!(
            self,
            TrainVariant::OneStepNoise | TrainVariant::OneStepNoiseBounded
        )
    }

    pub fn unrolled(self) -> bool {
        matches!(
            self,
            TrainVariant::TwoStepScratch | TrainVariant::TwoStepInitialized
        )
    }

    pub fn boundary_particles(self) -> bool {
        self == TrainVariant::OneStepNoiseBounded
    }

    pub fn requires_pretrained(self) -> bool {
        self == TrainVariant::TwoStepInitialized
    }

    pub fn all() -> [TrainVariant; 5] {
        [
            TrainVariant::OneStep,
            TrainVariant::OneStepNoise,
            TrainVariant::OneStepNoiseBounded,
            TrainVariant::TwoStepScratch,
            TrainVariant::TwoStepInitialized,
        ]
    }
}

/// A variant plus its knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantConfig {
    pub kind: TrainVariant,
    /// Unroll count n for the two-step variants.
    pub unroll_steps: usize,
    pub noise: NoiseConfig,
}

impl VariantConfig {
    pub fn new(kind: TrainVariant) -> Self {
        VariantConfig {
            kind,
            unroll_steps: 1,
            noise: NoiseConfig {
                enabled: kind.uses_noise(),
                ..NoiseConfig::default()
            },
        }
    }

    /// Effective unroll n (zero for one-step variants).
    pub fn effective_unroll(&self) -> usize {
        if self.kind.unrolled() {
            self.unroll_steps.max(1)
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub schedule: LrSchedule,
    pub total_steps: u64,
    pub seed: u64,
    pub checkpoint_interval: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 2,
            schedule: LrSchedule::default(),
            total_steps: 10_000,
            seed: 0,
            checkpoint_interval: 1_000,
        }
    }
}
