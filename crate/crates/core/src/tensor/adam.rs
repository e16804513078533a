//! Adam with bias correction.

use super::{Gradients, ParamSet};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(params: &ParamSet) -> Self {
        AdamState {
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first_moment: params.iter().map(|(_, t)| vec![0.0; t.len()]).collect(),
            second_moment: params.iter().map(|(_, t)| vec![0.0; t.len()]).collect(),
        }
    }

    /// Fresh zeroed moments for the same parameter layout.
    pub fn reset(&mut self) {
        self.step_count = 0;
        for m in &mut self.first_moment {
            m.iter_mut().for_each(|x| *x = 0.0);
        }
        for v in &mut self.second_moment {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    pub fn first_moment(&self) -> &[Vec<f64>] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[Vec<f64>] {
        &self.second_moment
    }

    /// Replace both moment buffers (checkpoint restore).
    pub fn set_moments(&mut self, first: Vec<Vec<f64>>, second: Vec<Vec<f64>>) {
        debug_assert_eq!(first.len(), self.first_moment.len());
        debug_assert_eq!(second.len(), self.second_moment.len());
        self.first_moment = first;
        self.second_moment = second;
    }

    fn aligned_with(&self, params: &ParamSet) -> bool {
        self.first_moment.len() == params.len()
            && params
                .iter()
                .zip(&self.first_moment)
                .all(|((_, t), m)| t.len() == m.len())
    }
}

/// One Adam update over every parameter tensor. Rejects non-finite gradients
/// instead of propagating NaN into the weights.
pub fn adam_step(
    params: &mut ParamSet,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if !state.aligned_with(params) || grads.per_param.len() != params.len() {
        return Err(Error::Contract(
            "optimizer state not aligned with parameters".into(),
        ));
    }
    for (idx, g) in grads.per_param.iter().enumerate() {
        if let Some(element) = g.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteGradient {
                name: params.name(super::ParamId(idx)).to_string(),
                element,
            });
        }
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    for idx in 0..params.len() {
        let g = &grads.per_param[idx];
        let m = &mut state.first_moment[idx];
        let v = &mut state.second_moment[idx];
        let w = params.tensor_mut(super::ParamId(idx)).values_mut();
        for i in 0..w.len() {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            w[i] -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn scalar_params(w: f64) -> ParamSet {
        let mut ps = ParamSet::new();
        ps.add("w", Tensor::new(vec![1], vec![w]).unwrap());
        ps
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut ps = scalar_params(1.25);
        let mut state = AdamState::new(&ps);
        let grads = Gradients {
            per_param: vec![vec![0.0]],
        };
        for _ in 0..5 {
            adam_step(&mut ps, &grads, &mut state, 0.1).unwrap();
        }
        assert_eq!(ps.tensor(crate::tensor::ParamId(0)).values()[0], 1.25);
        assert_eq!(state.first_moment()[0][0], 0.0);
    }

    #[test]
    fn first_step_magnitude_is_lr() {
        // bias-corrected first step: |update| = lr * g / (|g| + eps') ~ lr
        let mut ps = scalar_params(0.0);
        let mut state = AdamState::new(&ps);
        let grads = Gradients {
            per_param: vec![vec![3.7]],
        };
        adam_step(&mut ps, &grads, &mut state, 0.01).unwrap();
        let w = ps.tensor(crate::tensor::ParamId(0)).values()[0];
        assert!(w < 0.0, "update opposes gradient sign");
        assert!((w.abs() - 0.01).abs() < 1e-6, "got {w}");
    }

    /// 100 steps on f(w) = (w-3)^2 from w = 0 with lr = 0.1.
    #[test]
    fn converges_on_scalar_quadratic() {
        let mut ps = scalar_params(0.0);
        let mut state = AdamState::new(&ps);
        for _ in 0..100 {
            let w = ps.tensor(crate::tensor::ParamId(0)).values()[0];
            let grads = Gradients {
                per_param: vec![vec![2.0 * (w - 3.0)]],
            };
            adam_step(&mut ps, &grads, &mut state, 0.1).unwrap();
        }
        let w = ps.tensor(crate::tensor::ParamId(0)).values()[0];
        assert!((w - 3.0).abs() < 0.1, "w = {w}");
    }

    #[test]
    fn lr_zero_is_identity() {
        let mut ps = scalar_params(0.5);
        let mut state = AdamState::new(&ps);
        let grads = Gradients {
            per_param: vec![vec![1.0]],
        };
        adam_step(&mut ps, &grads, &mut state, 0.0).unwrap();
        assert_eq!(ps.tensor(crate::tensor::ParamId(0)).values()[0], 0.5);
    }

    #[test]
    fn non_finite_gradient_is_rejected_with_name() {
        let mut ps = scalar_params(0.5);
        let mut state = AdamState::new(&ps);
        let grads = Gradients {
            per_param: vec![vec![f64::NAN]],
        };
        let err = adam_step(&mut ps, &grads, &mut state, 0.1).unwrap_err();
        assert!(err.to_string().contains("`w`"), "{err}");
        // weights untouched
        assert_eq!(ps.tensor(crate::tensor::ParamId(0)).values()[0], 0.5);
    }
}
