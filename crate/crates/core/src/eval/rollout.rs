//! Autoregressive rollouts driven by any step model, plus the reference
//! models used for testing and baselines.

use crate::data::{normalize, NormStats, Trajectory};
use crate::graph::GnsModel;
use crate::{Error, ParticleType, Result, Vec2};

/// Anything that can advance a six-frame window by one step. `target_frame`
/// is the source-trajectory index of the frame being predicted, which lets
/// oracle models look it up; learned models ignore it.
pub trait StepModel: Sync {
    fn predict_positions(
        &self,
        window: &[&[Vec2]; 6],
        types: &[ParticleType],
        target_frame: usize,
    ) -> Result<Vec<Vec2>>;

    /// Normalized accelerations for the prediction landing on `target_frame`.
    fn predict_accelerations(
        &self,
        window: &[&[Vec2]; 6],
        types: &[ParticleType],
        target_frame: usize,
    ) -> Result<Vec<Vec2>>;
}

impl StepModel for GnsModel {
    fn predict_positions(
        &self,
        window: &[&[Vec2]; 6],
        types: &[ParticleType],
        _target_frame: usize,
    ) -> Result<Vec<Vec2>> {
        self.step_positions(window, types)
    }

    fn predict_accelerations(
        &self,
        window: &[&[Vec2]; 6],
        types: &[ParticleType],
        _target_frame: usize,
    ) -> Result<Vec<Vec2>> {
        self.accelerations_normalized(window, types)
    }
}

/// Identity closure over a source trajectory: returns ground-truth frames and
/// ground-truth normalized accelerations bitwise, so every metric of this
/// model is exactly zero.
pub struct GtOracle<'a> {
    pub traj: &'a Trajectory,
    pub stats: NormStats,
}

impl StepModel for GtOracle<'_> {
    fn predict_positions(
        &self,
        _window: &[&[Vec2]; 6],
        _types: &[ParticleType],
        target_frame: usize,
    ) -> Result<Vec<Vec2>> {
        self.traj
            .frames
            .get(target_frame)
            .cloned()
            .ok_or_else(|| Error::Contract(format!("oracle asked beyond frame {target_frame}")))
    }

    fn predict_accelerations(
        &self,
        _window: &[&[Vec2]; 6],
        _types: &[ParticleType],
        target_frame: usize,
    ) -> Result<Vec<Vec2>> {
        super::metrics::normalized_gt_acceleration(self.traj, target_frame - 1, &self.stats)
    }
}

/// Constant-velocity baseline: zero raw acceleration everywhere.
pub struct ZeroAcceleration {
    pub stats: NormStats,
}

impl StepModel for ZeroAcceleration {
    fn predict_positions(
        &self,
        window: &[&[Vec2]; 6],
        types: &[ParticleType],
        _target_frame: usize,
    ) -> Result<Vec<Vec2>> {
        let now = window[5];
        let prev = window[4];
        Ok(types
            .iter()
            .enumerate()
            .map(|(i, t)| {
                if *t == ParticleType::Obstacle {
                    now[i]
                } else {
                    [
                        now[i][0] + (now[i][0] - prev[i][0]),
                        now[i][1] + (now[i][1] - prev[i][1]),
                    ]
                }
            })
            .collect())
    }

    fn predict_accelerations(
        &self,
        _window: &[&[Vec2]; 6],
        types: &[ParticleType],
        _target_frame: usize,
    ) -> Result<Vec<Vec2>> {
        let zero = normalize(
            [0.0, 0.0],
            self.stats.acceleration.mean,
            self.stats.acceleration_std()?,
        )?;
        Ok(vec![zero; types.len()])
    }
}

#[derive(Debug, Clone)]
pub struct RolloutResult {
    /// Source frame index of the first window frame.
    pub start_frame: usize,
    /// Predicted frames; entry k corresponds to source frame
    /// `start_frame + 6 + k`.
    pub frames: Vec<Vec<Vec2>>,
}

/// Roll out from the first six ground-truth frames.
pub fn rollout(model: &dyn StepModel, source: &Trajectory, steps: usize) -> Result<RolloutResult> {
    rollout_segment(model, source, 0, steps)
}

/// Roll out `steps` predictions after re-initializing the window from ground
/// truth at `start`.
pub fn rollout_segment(
    model: &dyn StepModel,
    source: &Trajectory,
    start: usize,
    steps: usize,
) -> Result<RolloutResult> {
    if start + 6 > source.len() || steps > source.len() - 6 - start {
        return Err(Error::Contract(format!(
            "rollout needs {} frames from {start}, source has {}",
            6 + steps,
            source.len()
        )));
    }
    let mut window: Vec<Vec<Vec2>> = source.frames[start..start + 6].to_vec();
    let mut frames = Vec::with_capacity(steps);
    for k in 0..steps {
        let refs: [&[Vec2]; 6] = std::array::from_fn(|i| window[i].as_slice());
        let target_frame = start + 6 + k;
        let next = model.predict_positions(&refs, &source.types, target_frame)?;
        if let Some(i) = next
            .iter()
            .position(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(Error::RolloutDiverged {
                step: k,
                detail: format!("particle {i} at non-finite position"),
            });
        }
        window.rotate_left(1);
        window[5] = next.clone();
        frames.push(next);
    }
    Ok(RolloutResult {
        start_frame: start,
        frames,
    })
}
