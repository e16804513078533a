//! The four evaluation metrics. Obstacle particles are excluded from every
//! metric; only fluid motion is scored.

use super::emd::emd;
use super::rollout::{rollout, rollout_segment, StepModel};
use crate::data::{normalize, NormStats, Trajectory};
use crate::{Error, Result, Vec2};

/// Normalized ground-truth acceleration at `current_frame` for every
/// particle: the second difference of positions around that frame. This is
/// the shared target computation for the one-step metric and the oracle
/// model, so the two agree bitwise.
pub fn normalized_gt_acceleration(
    traj: &Trajectory,
    current_frame: usize,
    stats: &NormStats,
) -> Result<Vec<Vec2>> {
    if current_frame < 1 || current_frame + 1 >= traj.len() {
        return Err(Error::Contract(format!(
            "acceleration undefined at frame {current_frame}"
        )));
    }
    let mean = stats.acceleration.mean;
    let std = stats.acceleration_std()?;
    let prev = &traj.frames[current_frame - 1];
    let now = &traj.frames[current_frame];
    let next = &traj.frames[current_frame + 1];
    (0..traj.particle_count())
        .map(|i| {
            let a = [
                next[i][0] - 2.0 * now[i][0] + prev[i][0],
                next[i][1] - 2.0 * now[i][1] + prev[i][1],
            ];
            normalize(a, mean, std)
        })
        .collect()
}

/// Particle-wise MSE of one-step acceleration predictions, averaged over all
/// valid frames, fluid particles and axes; normalized acceleration units.
pub fn mse_acc_1(model: &dyn StepModel, traj: &Trajectory, stats: &NormStats) -> Result<f64> {
    if traj.len() < 7 {
        return Err(Error::Contract("trajectory too short".into()));
    }
    let fluid = traj.fluid_indices();
    if fluid.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for t in 5..=traj.len() - 2 {
        let window: [&[Vec2]; 6] = std::array::from_fn(|k| traj.frames[t - 5 + k].as_slice());
        let pred = model.predict_accelerations(&window, &traj.types, t + 1)?;
        let target = normalized_gt_acceleration(traj, t, stats)?;
        for &i in &fluid {
            let dx = pred[i][0] - target[i][0];
            let dy = pred[i][1] - target[i][1];
            total += dx * dx + dy * dy;
            count += 2;
        }
    }
    Ok(total / count as f64)
}

fn fluid_position_mse(pred: &[Vec2], gt: &[Vec2], fluid: &[usize]) -> f64 {
    if fluid.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for &i in fluid {
        let dx = pred[i][0] - gt[i][0];
        let dy = pred[i][1] - gt[i][1];
        total += dx * dx + dy * dy;
    }
    total / (2 * fluid.len()) as f64
}

/// Position MSE of 20-step rollouts restarted from ground truth every 20
/// frames, averaged across segments, time, fluid particles and axes.
pub fn mse_20(model: &dyn StepModel, traj: &Trajectory) -> Result<f64> {
    const HORIZON: usize = 20;
    if traj.len() < 6 + HORIZON {
        return Err(Error::Contract(format!(
            "trajectory of {} frames is too short for 20-step segments",
            traj.len()
        )));
    }
    let fluid = traj.fluid_indices();
    let mut total = 0.0;
    let mut segments = 0usize;
    let mut start = 0usize;
    while start + 6 + HORIZON <= traj.len() {
        let result = rollout_segment(model, traj, start, HORIZON)?;
        let mut seg = 0.0;
        for (k, frame) in result.frames.iter().enumerate() {
            seg += fluid_position_mse(frame, &traj.frames[start + 6 + k], &fluid);
        }
        total += seg / HORIZON as f64;
        segments += 1;
        start += HORIZON;
    }
    Ok(total / segments as f64)
}

/// Full-rollout position MSE plus the per-step error curve.
#[derive(Debug, Clone)]
pub struct Mse400 {
    pub mean: f64,
    /// Per predicted step, mean over fluid particles and axes.
    pub curve: Vec<f64>,
}

pub fn mse_400(model: &dyn StepModel, traj: &Trajectory) -> Result<Mse400> {
    let steps = traj.len() - 6;
    let result = rollout(model, traj, steps)?;
    let fluid = traj.fluid_indices();
    let curve: Vec<f64> = result
        .frames
        .iter()
        .enumerate()
        .map(|(k, frame)| fluid_position_mse(frame, &traj.frames[6 + k], &fluid))
        .collect();
    let mean = if curve.is_empty() {
        0.0
    } else {
        curve.iter().sum::<f64>() / curve.len() as f64
    };
    Ok(Mse400 { mean, curve })
}

/// EMD between predicted and ground-truth fluid particles, sampled every
/// `every` rollout steps (the first predicted frame is step 0). Returns
/// (step, value) pairs.
pub fn emd_samples(
    pred_frames: &[Vec<Vec2>],
    traj: &Trajectory,
    start_frame: usize,
    every: usize,
) -> Result<Vec<(usize, f64)>> {
    let fluid = traj.fluid_indices();
    let mut out = Vec::new();
    for (k, frame) in pred_frames.iter().enumerate().step_by(every.max(1)) {
        let gt = &traj.frames[start_frame + 6 + k];
        let pred_fluid: Vec<Vec2> = fluid.iter().map(|&i| frame[i]).collect();
        let gt_fluid: Vec<Vec2> = fluid.iter().map(|&i| gt[i]).collect();
        out.push((k, emd(&pred_fluid, &gt_fluid)?));
    }
    Ok(out)
}
