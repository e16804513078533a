//! Exponential learning-rate decay with a floor.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LrSchedule {
    pub lr_start: f64,
    pub lr_floor: f64,
    pub decay_steps: u64,
}

impl Default for LrSchedule {
    fn default() -> Self {
        LrSchedule {
            lr_start: 1e-4,
            lr_floor: 1e-6,
            decay_steps: 100_000,
        }
    }
}

impl LrSchedule {
    /// lr(t) = floor + (start - floor) * 0.1^(t / decay_steps)
    pub fn lr_at(&self, step: u64) -> f64 {
        self.lr_floor
            + (self.lr_start - self.lr_floor) * 0.1f64.powf(step as f64 / self.decay_steps as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_lr_start() {
        let s = LrSchedule::default();
        assert_eq!(s.lr_at(0), 1e-4);
    }

    #[test]
    fn approaches_floor() {
        let s = LrSchedule::default();
        let lr = s.lr_at(10_000_000);
        assert!((lr - 1e-6).abs() < 1e-12, "{lr}");
    }

    #[test]
    fn value_at_decay_steps() {
        let s = LrSchedule::default();
        let expect = 1e-6 + (1e-4 - 1e-6) * 0.1;
        assert!((s.lr_at(100_000) - expect).abs() < 1e-18);
    }

    #[test]
    fn monotonically_non_increasing() {
        let s = LrSchedule::default();
        let mut prev = f64::INFINITY;
        for step in (0..2_000_000).step_by(10_000) {
            let lr = s.lr_at(step);
            assert!(lr <= prev);
            prev = lr;
        }
    }
}
