//! Online per-axis normalization statistics (Welford), accumulated during
//! data generation and reused for feature/target normalization.

use super::trajectory::Trajectory;
use crate::{Error, ParticleType, Result, Vec2};
use serde::{Deserialize, Serialize};

/// Single-pass mean/variance per axis. `m2` is kept in the serialized form so
/// re-scans and merges reproduce bitwise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AxisStats {
    pub count: u64,
    pub mean: Vec2,
    pub m2: Vec2,
}

impl AxisStats {
    pub fn push(&mut self, sample: Vec2) {
        self.count += 1;
        for axis in 0..2 {
            let delta = sample[axis] - self.mean[axis];
            self.mean[axis] += delta / self.count as f64;
            let delta2 = sample[axis] - self.mean[axis];
            self.m2[axis] += delta * delta2;
        }
    }

    /// Chan-style parallel combination.
    pub fn merge(&mut self, other: &AxisStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n1 = self.count as f64;
        let n2 = other.count as f64;
        let n = n1 + n2;
        for axis in 0..2 {
            let delta = other.mean[axis] - self.mean[axis];
            self.mean[axis] += delta * n2 / n;
            self.m2[axis] += other.m2[axis] + delta * delta * n1 * n2 / n;
        }
        self.count += other.count;
    }

    /// Population standard deviation; undefined below two samples.
    pub fn std(&self) -> Result<Vec2> {
        if self.count < 2 {
            return Err(Error::Contract(format!(
                "standard deviation undefined with {} samples",
                self.count
            )));
        }
        let n = self.count as f64;
        let std = [(self.m2[0] / n).sqrt(), (self.m2[1] / n).sqrt()];
        if std[0] <= 0.0 || std[1] <= 0.0 {
            return Err(Error::Contract(
                "degenerate axis with zero variance; normalization undefined".into(),
            ));
        }
        Ok(std)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub velocity: AxisStats,
    pub acceleration: AxisStats,
}

impl NormStats {
    /// Statistics of one trajectory: per-step displacements of fluid
    /// particles and their differences. Obstacle particles are excluded.
    pub fn for_trajectory(traj: &Trajectory) -> NormStats {
        let mut stats = NormStats::default();
        stats.accumulate_trajectory(traj);
        stats
    }

    pub fn accumulate_trajectory(&mut self, traj: &Trajectory) {
        let fluid: Vec<usize> = traj
            .types
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == ParticleType::Fluid)
            .map(|(i, _)| i)
            .collect();
        let frames = &traj.frames;
        for k in 1..frames.len() {
            for &p in &fluid {
                let v = sub(frames[k][p], frames[k - 1][p]);
                self.velocity.push(v);
            }
        }
        for k in 1..frames.len().saturating_sub(1) {
            for &p in &fluid {
                let a = [
                    frames[k + 1][p][0] - 2.0 * frames[k][p][0] + frames[k - 1][p][0],
                    frames[k + 1][p][1] - 2.0 * frames[k][p][1] + frames[k - 1][p][1],
                ];
                self.acceleration.push(a);
            }
        }
    }

    pub fn merge(&mut self, other: &NormStats) {
        self.velocity.merge(&other.velocity);
        self.acceleration.merge(&other.acceleration);
    }

    pub fn velocity_std(&self) -> Result<Vec2> {
        self.velocity.std()
    }

    pub fn acceleration_std(&self) -> Result<Vec2> {
        self.acceleration.std()
    }
}

fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

/// (x - mean) / std, element-wise.
pub fn normalize(x: Vec2, mean: Vec2, std: Vec2) -> Result<Vec2> {
    if std[0] <= 0.0 || std[1] <= 0.0 {
        return Err(Error::Contract(format!("non-positive std {std:?}")));
    }
    Ok([(x[0] - mean[0]) / std[0], (x[1] - mean[1]) / std[1]])
}

pub fn denormalize(x: Vec2, mean: Vec2, std: Vec2) -> Vec2 {
    [x[0] * std[0] + mean[0], x[1] * std[1] + mean[1]]
}
