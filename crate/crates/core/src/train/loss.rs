//! One-step and unrolled training losses.
//!
//! The squared norm is averaged over particles and axes so the loss scale is
//! particle-count invariant across scenes.

use crate::tensor::{Tape, Var};
use crate::{Error, Result, Vec2};

/// Mean over particles and axes of the squared difference between predicted
/// and ground-truth accelerations (both in normalized units).
pub fn one_step_loss(pred: &[Vec2], target: &[Vec2]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::shape("one_step_loss", target.len(), pred.len()));
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (p, t) in pred.iter().zip(target) {
        let dx = p[0] - t[0];
        let dy = p[1] - t[1];
        total += dx * dx + dy * dy;
    }
    Ok(total / (2 * pred.len()) as f64)
}

/// Tape form of the same quantity.
pub fn sq_mean_diff(tape: &mut Tape, pred: Var, target: Var) -> Result<Var> {
    let diff = tape.sub(pred, target)?;
    Ok(tape.sq_mean(diff))
}

/// Unrolled loss driver shared by the one-step (n = 0) and multi-step
/// (n >= 1) paths.
///
/// `predict` maps a six-frame position window to normalized accelerations for
/// every particle. The first term uses the window as given; each subsequent
/// term advances the window with the model's own Euler-integrated positions
/// (fluid rows only; `fluid_weights` is 1 for fluid, 0 for obstacles), so
/// gradients flow through the predicted intermediate states. For n >= 1 the
/// sum of the n+1 terms is divided by n.
#[allow(clippy::too_many_arguments)]
pub fn unrolled_loss<F>(
    tape: &mut Tape,
    window: [Var; 6],
    targets_fluid: &[Vec<Vec2>],
    fluid: &[usize],
    fluid_weights: &[f64],
    acc_mean: Vec2,
    acc_std: Vec2,
    n: usize,
    mut predict: F,
) -> Result<Var>
where
    F: FnMut(&mut Tape, &[Var; 6]) -> Result<Var>,
{
    if targets_fluid.len() != n + 1 {
        return Err(Error::Contract(format!(
            "unrolled loss over n = {n} steps needs {} target frames, got {}",
            n + 1,
            targets_fluid.len()
        )));
    }
    let mut window = window;
    let mut total: Option<Var> = None;
    for (i, target) in targets_fluid.iter().enumerate() {
        let acc = predict(tape, &window)?;
        let acc_fluid = tape.gather_rows(acc, fluid)?;
        let target_var = tape.constant_rows(target);
        let term = sq_mean_diff(tape, acc_fluid, target_var)?;
        total = Some(match total {
            None => term,
            Some(t) => tape.add(t, term)?,
        });
        if i < n {
            // Euler advance: v' = v + a (fluid only), p' = p + v'
            let a_raw = tape.col_affine(acc, &acc_std, &acc_mean)?;
            let a_fluid = tape.row_scale(a_raw, fluid_weights)?;
            let v = tape.sub(window[5], window[4])?;
            let v_next = tape.add(v, a_fluid)?;
            let p_next = tape.add(window[5], v_next)?;
            window = [window[1], window[2], window[3], window[4], window[5], p_next];
        }
    }
    let total = total.expect("at least one term");
    Ok(if n >= 1 {
        tape.scale(total, 1.0 / n as f64)
    } else {
        total
    })
}

/// Public multi-step entry point; n >= 1 by contract.
#[allow(clippy::too_many_arguments)]
pub fn multi_step_loss<F>(
    tape: &mut Tape,
    window: [Var; 6],
    targets_fluid: &[Vec<Vec2>],
    fluid: &[usize],
    fluid_weights: &[f64],
    acc_mean: Vec2,
    acc_std: Vec2,
    n: usize,
    predict: F,
) -> Result<Var>
where
    F: FnMut(&mut Tape, &[Var; 6]) -> Result<Var>,
{
    if n < 1 {
        return Err(Error::Contract("multi-step loss requires n >= 1".into()));
    }
    unrolled_loss(
        tape,
        window,
        targets_fluid,
        fluid,
        fluid_weights,
        acc_mean,
        acc_std,
        n,
        predict,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{ParamSet, Tensor};

    #[test]
    fn identical_inputs_give_zero() {
        let a = vec![[0.3, -0.2], [1.0, 2.0]];
        assert_eq!(one_step_loss(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn constant_offset_gives_its_square() {
        let gt = vec![[0.5, 0.5], [-1.0, 0.25]];
        let pred: Vec<_> = gt.iter().map(|p| [p[0] + 0.3, p[1] + 0.3]).collect();
        let loss = one_step_loss(&pred, &gt).unwrap();
        assert!((loss - 0.09).abs() < 1e-15);
    }

    /// Straight-line scalar oracle for the tape path.
    #[test]
    fn tape_loss_matches_value_loss() {
        use rand::Rng;
        let mut rng = crate::rng::rng_for(3, 0, 0);
        let pred: Vec<Vec2> = (0..7)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let gt: Vec<Vec2> = (0..7)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let scalar = one_step_loss(&pred, &gt).unwrap();
        let mut tape = Tape::new();
        let p = tape.constant_rows(&pred);
        let g = tape.constant_rows(&gt);
        let loss = sq_mean_diff(&mut tape, p, g).unwrap();
        assert!((tape.scalar_value(loss).unwrap() - scalar).abs() < 1e-12);
    }

    /// A frozen linear toy model, hand-unrolled for n = 1.
    ///
    /// Model: acc = W (p5 - p4) on every particle, normalized units; target
    /// accelerations are arbitrary constants. The oracle recomputes both
    /// terms with plain scalar arithmetic.
    #[test]
    fn two_step_loss_matches_hand_unrolled_computation() {
        let w = [[0.4, -0.1], [0.2, 0.3]];
        let acc_mean = [0.01, -0.02];
        let acc_std = [0.5, 0.25];
        let frames: [Vec<Vec2>; 6] = std::array::from_fn(|k| {
            vec![
                [0.30 + 0.010 * k as f64, 0.60 - 0.005 * k as f64],
                [0.70 - 0.008 * k as f64, 0.40 + 0.012 * k as f64],
            ]
        });
        let targets: Vec<Vec<Vec2>> = vec![
            vec![[0.2, -0.3], [0.5, 0.1]],
            vec![[-0.4, 0.6], [0.05, -0.15]],
        ];
        let fluid = vec![0usize, 1];
        let weights = vec![1.0, 1.0];

        // parameterize W so the tape path exercises parameter binding
        let mut ps = ParamSet::new();
        let wid = ps.add(
            "w",
            Tensor::new(vec![2, 2], vec![w[0][0], w[0][1], w[1][0], w[1][1]]).unwrap(),
        );

        let mut tape = Tape::new();
        let vars: [Var; 6] = std::array::from_fn(|k| tape.constant_rows(&frames[k]));
        let loss = multi_step_loss(
            &mut tape,
            vars,
            &targets,
            &fluid,
            &weights,
            acc_mean,
            acc_std,
            1,
            |tape, window| {
                let v = tape.sub(window[5], window[4])?;
                let wv = tape.param(&ps, wid);
                tape.matmul(v, wv)
            },
        )
        .unwrap();
        let got = tape.scalar_value(loss).unwrap();

        // hand-unrolled oracle
        let matvec = |v: Vec2| -> Vec2 {
            [
                v[0] * w[0][0] + v[1] * w[1][0],
                v[0] * w[0][1] + v[1] * w[1][1],
            ]
        };
        let mut expected = 0.0;
        let mut p5 = frames[5].clone();
        let mut p4 = frames[4].clone();
        for (i, target) in targets.iter().enumerate() {
            let mut term = 0.0;
            let mut next = Vec::new();
            for pi in 0..2 {
                let v = [p5[pi][0] - p4[pi][0], p5[pi][1] - p4[pi][1]];
                let acc = matvec(v);
                let dx = acc[0] - target[pi][0];
                let dy = acc[1] - target[pi][1];
                term += dx * dx + dy * dy;
                let a = [
                    acc[0] * acc_std[0] + acc_mean[0],
                    acc[1] * acc_std[1] + acc_mean[1],
                ];
                let vn = [v[0] + a[0], v[1] + a[1]];
                next.push([p5[pi][0] + vn[0], p5[pi][1] + vn[1]]);
            }
            expected += term / 4.0;
            if i == 0 {
                p4 = p5;
                p5 = next;
            }
        }
        // n = 1 prefactor
        expected /= 1.0;
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
    }

    /// The n = 0 internal path reduces to the plain one-step loss.
    #[test]
    fn zero_unroll_equals_one_step_loss() {
        let frames: [Vec<Vec2>; 6] =
            std::array::from_fn(|k| vec![[0.4 + 0.01 * k as f64, 0.5]]);
        let target = vec![vec![[0.25, -0.5]]];
        let mut tape = Tape::new();
        let vars: [Var; 6] = std::array::from_fn(|k| tape.constant_rows(&frames[k]));
        let loss = unrolled_loss(
            &mut tape,
            vars,
            &target,
            &[0],
            &[1.0],
            [0.0, 0.0],
            [1.0, 1.0],
            0,
            |tape, window| {
                let v = tape.sub(window[5], window[4])?;
                Ok(tape.scale(v, 2.0))
            },
        )
        .unwrap();
        let got = tape.scalar_value(loss).unwrap();
        let pred = [[0.02, 0.0]];
        let expected = one_step_loss(&pred, &target[0]).unwrap();
        assert!((got - expected).abs() < 1e-12);
        // public API rejects n = 0
        let mut tape2 = Tape::new();
        let vars2: [Var; 6] = std::array::from_fn(|k| tape2.constant_rows(&frames[k]));
        assert!(multi_step_loss(
            &mut tape2,
            vars2,
            &target,
            &[0],
            &[1.0],
            [0.0, 0.0],
            [1.0, 1.0],
            0,
            |tape, window| {
                let v = tape.sub(window[5], window[4])?;
                Ok(tape.scale(v, 2.0))
            },
        )
        .is_err());
    }

    /// Gradients flow through the intermediate predicted state: zeroing that
    /// path must change the second term's parameter gradient.
    #[test]
    fn gradient_flows_through_unrolled_state() {
        let mut ps = ParamSet::new();
        let wid = ps.add("w", Tensor::new(vec![2, 2], vec![0.3, 0.1, -0.2, 0.4]).unwrap());
        let frames: [Vec<Vec2>; 6] =
            std::array::from_fn(|k| vec![[0.3 + 0.02 * k as f64, 0.5 - 0.01 * k as f64]]);
        let targets = vec![vec![[0.1, 0.2]], vec![[-0.2, 0.3]]];

        let grad_with = |detach: bool| -> Vec<f64> {
            let mut ps = ps.clone();
            let mut tape = Tape::new();
            let vars: [Var; 6] = std::array::from_fn(|k| tape.constant_rows(&frames[k]));
            let fluid = vec![0usize];
            let weights = if detach { vec![0.0] } else { vec![1.0] };
            let loss = multi_step_loss(
                &mut tape,
                vars,
                &targets,
                &fluid,
                &weights,
                [0.0, 0.0],
                [1.0, 1.0],
                1,
                |tape, window| {
                    let v = tape.sub(window[5], window[4])?;
                    let w = tape.param(&ps, wid);
                    tape.matmul(v, w)
                },
            )
            .unwrap();
            tape.backward(loss).unwrap();
            tape.write_param_grads(&mut ps);
            ps.tensor(wid).grad().unwrap().to_vec()
        };

        let g_full = grad_with(false);
        let g_detached = grad_with(true);
        assert!(
            g_full
                .iter()
                .zip(&g_detached)
                .any(|(a, b)| (a - b).abs() > 1e-12),
            "gradient must depend on the unrolled state path"
        );
    }
}
