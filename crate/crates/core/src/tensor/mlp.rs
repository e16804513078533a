//! MLPs with ReLU hidden activations and optional LayerNorm after the output
//! layer, plus seeded Glorot-style initialization.

use super::{ParamId, ParamSet, Tape, Tensor, Var};
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const LAYER_NORM_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinearLayer {
    pub weight: ParamId, // [in, out]
    pub bias: ParamId,   // [out]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<LinearLayer>,
    /// LayerNorm (gain, bias) applied after the output layer.
    pub output_layer_norm: Option<(ParamId, ParamId)>,
}

impl MlpParams {
    /// Initialize an MLP with the given layer dimensions, e.g. `[in, h, h, out]`.
    /// Weights get uniform Glorot fan-based init; biases start at zero.
    pub fn init<R: Rng>(
        params: &mut ParamSet,
        prefix: &str,
        dims: &[usize],
        layer_norm: bool,
        rng: &mut R,
    ) -> Self {
        assert!(dims.len() >= 2, "MLP needs at least one layer");
        let mut layers = Vec::new();
        for (l, pair) in dims.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let values: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-bound..bound))
                .collect();
            let weight = params.add(
                format!("{prefix}/layer{l}/weight"),
                Tensor::new(vec![fan_in, fan_out], values).unwrap(),
            );
            let bias = params.add(
                format!("{prefix}/layer{l}/bias"),
                Tensor::zeros(vec![fan_out]),
            );
            layers.push(LinearLayer { weight, bias });
        }
        let output_layer_norm = layer_norm.then(|| {
            let d = *dims.last().unwrap();
            let gain = params.add(format!("{prefix}/norm/gain"), Tensor::filled(vec![d], 1.0));
            let bias = params.add(format!("{prefix}/norm/bias"), Tensor::zeros(vec![d]));
            (gain, bias)
        });
        MlpParams {
            layers,
            output_layer_norm,
        }
    }

    pub fn in_dim(&self, params: &ParamSet) -> usize {
        params.tensor(self.layers[0].weight).shape()[0]
    }

    pub fn out_dim(&self, params: &ParamSet) -> usize {
        *params
            .tensor(self.layers.last().unwrap().weight)
            .shape()
            .last()
            .unwrap()
    }

    pub fn forward(&self, tape: &mut Tape, params: &ParamSet, input: Var) -> Result<Var> {
        mlp_forward(tape, params, self, input)
    }
}

/// Affine layers with ReLU between them; optional LayerNorm after the output.
pub fn mlp_forward(tape: &mut Tape, params: &ParamSet, mlp: &MlpParams, input: Var) -> Result<Var> {
    let mut x = input;
    let last = mlp.layers.len() - 1;
    for (l, layer) in mlp.layers.iter().enumerate() {
        let w = tape.param(params, layer.weight);
        let b = tape.param(params, layer.bias);
        let (_, in_dim) = tape.shape(x);
        let (w_in, _) = tape.shape(w);
        if in_dim != w_in {
            return Err(Error::shape(
                format!("mlp layer {l}"),
                format!("input width {w_in}"),
                in_dim,
            ));
        }
        x = tape.matmul(x, w)?;
        x = tape.add_row(x, b)?;
        if l != last {
            x = tape.relu(x);
        }
    }
    if let Some((gain, bias)) = mlp.output_layer_norm {
        let g = tape.param(params, gain);
        let b = tape.param(params, bias);
        x = tape.layer_norm(x, g, b, LAYER_NORM_EPS)?;
    }
    Ok(x)
}

/// Value-level LayerNorm over the feature dimension, population variance.
pub fn layer_norm(x: &Tensor, gain: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (n, d) = x.dims2();
    if gain.len() != d || bias.len() != d {
        return Err(Error::shape(
            "layer_norm",
            format!("gain/bias of width {d}"),
            format!("{}/{}", gain.len(), bias.len()),
        ));
    }
    let mut out = vec![0.0; n * d];
    for r in 0..n {
        let row = &x.values()[r * d..(r + 1) * d];
        let mean = row.iter().sum::<f64>() / d as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
        let inv_std = 1.0 / (var + LAYER_NORM_EPS).sqrt();
        for c in 0..d {
            out[r * d + c] = (row[c] - mean) * inv_std * gain.values()[c] + bias.values()[c];
        }
    }
    Tensor::new(vec![n, d], out)
}
