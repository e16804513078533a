//! Checkpoint selection by validation-set full-rollout MSE.

use super::metrics::mse_400;
use super::rollout::StepModel;
use crate::data::Trajectory;
use crate::graph::GnsModel;
use crate::train::Checkpoint;
use crate::{Error, Result};

/// Index of the smallest MSE-400 value; ties go to the later training step.
pub fn argmin_mse_400(evaluated: &[(u64, f64)]) -> Result<usize> {
    if evaluated.is_empty() {
        return Err(Error::Contract("empty checkpoint series".into()));
    }
    let mut best = 0usize;
    for (i, &(step, value)) in evaluated.iter().enumerate() {
        let (b_step, b_value) = evaluated[best];
        if value < b_value || (value == b_value && step > b_step) {
            best = i;
        }
    }
    Ok(best)
}

/// Mean MSE-400 of a model over a validation set.
pub fn validation_mse_400(model: &dyn StepModel, validation: &[Trajectory]) -> Result<f64> {
    if validation.is_empty() {
        return Err(Error::Contract("empty validation set".into()));
    }
    let mut total = 0.0;
    for traj in validation {
        total += mse_400(model, traj)?.mean;
    }
    Ok(total / validation.len() as f64)
}

/// Evaluate every checkpoint on the validation set and return the index of
/// the best one (plus the per-checkpoint scores for reporting).
pub fn select_checkpoint(
    checkpoints: &[Checkpoint],
    validation: &[Trajectory],
) -> Result<(usize, Vec<(u64, f64)>)> {
    if checkpoints.is_empty() {
        return Err(Error::Contract("empty checkpoint series".into()));
    }
    let mut evaluated = Vec::with_capacity(checkpoints.len());
    for ckpt in checkpoints {
        let bounds = validation
            .first()
            .map(|t| t.bounds())
            .unwrap_or_else(|| crate::data::Scaling::new((32, 32)).bounds());
        let model = GnsModel::new(ckpt.gns.clone(), ckpt.stats, bounds);
        evaluated.push((ckpt.step, validation_mse_400(&model, validation)?));
    }
    Ok((argmin_mse_400(&evaluated)?, evaluated))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_entry_selects_itself() {
        assert_eq!(argmin_mse_400(&[(100, 0.5)]).unwrap(), 0);
    }

    /// Synthetic series with planted losses.
    #[test]
    fn planted_losses_select_the_argmin() {
        let series = vec![(100, 0.9), (200, 0.4), (300, 0.7), (400, 0.4001)];
        assert_eq!(argmin_mse_400(&series).unwrap(), 1);
    }

    #[test]
    fn ties_break_toward_later_step() {
        let series = vec![(100, 0.4), (200, 0.4), (300, 0.5)];
        assert_eq!(argmin_mse_400(&series).unwrap(), 1);
    }

    #[test]
    fn empty_series_is_rejected() {
        assert!(argmin_mse_400(&[]).is_err());
    }
}
