//! Independent straight-line trace of the full forward pass on a three-node
//! path graph with hand-set weights: features, encoders with LayerNorm, one
//! interaction step with residuals and sum aggregation, decoder.
//!
//! The trace shares only the parameter *values* with the implementation; all
//! arithmetic here is plain scalar code.

use flipgns::data::{AxisStats, NormStats, Scaling};
use flipgns::graph::{GnsModel, GnsParams, ModelConfig};
use flipgns::tensor::{MlpParams, ParamId, ParamSet};
use flipgns::{ParticleType, Vec2};

const LN_EPS: f64 = 1e-5;

fn hand_set_weights(params: &mut ParamSet) {
    for idx in 0..params.len() {
        let id = ParamId(idx);
        let is_norm_gain = params.name(id).ends_with("norm/gain");
        let t = params.tensor_mut(id);
        for (e, v) in t.values_mut().iter_mut().enumerate() {
            *v = if is_norm_gain {
                1.0 + ((e % 3) as f64) * 0.1
            } else {
                (((7 * e + 3 * idx) % 11) as f64) / 11.0 - 0.5
            };
        }
    }
}

fn stats() -> NormStats {
    let mut velocity = AxisStats::default();
    let mut acceleration = AxisStats::default();
    for k in 0..8 {
        let t = k as f64;
        velocity.push([0.001 * t - 0.003, -0.002 * t + 0.005]);
        acceleration.push([0.0005 * t - 0.001, 0.0003 * t]);
    }
    NormStats {
        velocity,
        acceleration,
    }
}

struct Trace<'a> {
    params: &'a ParamSet,
}

impl Trace<'_> {
    fn linear(&self, layer: &flipgns::tensor::LinearLayer, x: &[f64]) -> Vec<f64> {
        let w = self.params.tensor(layer.weight);
        let b = self.params.tensor(layer.bias);
        let (fan_in, fan_out) = (w.shape()[0], w.shape()[1]);
        assert_eq!(x.len(), fan_in);
        let mut out = vec![0.0; fan_out];
        for o in 0..fan_out {
            let mut acc = b.values()[o];
            for i in 0..fan_in {
                acc += x[i] * w.values()[i * fan_out + o];
            }
            out[o] = acc;
        }
        out
    }

    fn mlp(&self, mlp: &MlpParams, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let last = mlp.layers.len() - 1;
        for (l, layer) in mlp.layers.iter().enumerate() {
            cur = self.linear(layer, &cur);
            if l != last {
                for v in cur.iter_mut() {
                    *v = v.max(0.0);
                }
            }
        }
        if let Some((gain_id, bias_id)) = mlp.output_layer_norm {
            let gain = self.params.tensor(gain_id);
            let bias = self.params.tensor(bias_id);
            let d = cur.len();
            let mean = cur.iter().sum::<f64>() / d as f64;
            let var = cur.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
            let inv = 1.0 / (var + LN_EPS).sqrt();
            for (c, v) in cur.iter_mut().enumerate() {
                *v = (*v - mean) * inv * gain.values()[c] + bias.values()[c];
            }
        }
        cur
    }
}

#[test]
fn forward_pass_matches_hand_computed_trace() {
    let config = ModelConfig {
        latent: 4,
        hidden_layers: 2,
        message_passing_steps: 1,
        connectivity_radius: 0.03,
        boundary_features: false,
        clip_boundary_at_radius: true,
        type_embed_dim: 2,
    };
    let mut gns = GnsParams::init(&config, 0);
    hand_set_weights(&mut gns.params);
    let stats = stats();
    let model = GnsModel::new(gns.clone(), stats, Scaling::new((32, 32)).bounds());

    // path graph: 0 - 1 - 2 with spacing 0.8 * radius, types mixed
    let r = config.connectivity_radius;
    let base: Vec<Vec2> = vec![
        [0.40, 0.50],
        [0.40 + 0.8 * r, 0.50],
        [0.40 + 1.6 * r, 0.50],
    ];
    // drift small enough that the path topology is stable across the window
    let drift: [Vec2; 3] = [[1e-4, -2e-4], [-5e-5, 1e-4], [2e-4, 5e-5]];
    let frames: [Vec<Vec2>; 6] = std::array::from_fn(|k| {
        base.iter()
            .enumerate()
            .map(|(i, p)| {
                [
                    p[0] + drift[i][0] * k as f64,
                    p[1] + drift[i][1] * k as f64,
                ]
            })
            .collect()
    });
    let types = [
        ParticleType::Fluid,
        ParticleType::Fluid,
        ParticleType::Obstacle,
    ];
    let window: [&[Vec2]; 6] = std::array::from_fn(|k| frames[k].as_slice());
    let got = model.accelerations_normalized(&window, &types).unwrap();

    // ---- independent trace ----
    let trace = Trace { params: &gns.params };
    let v_mean = stats.velocity.mean;
    let v_std = stats.velocity_std().unwrap();

    // node inputs: 5 normalized velocities + type embedding
    let embed = gns.params.tensor(gns.type_embedding);
    let mut node_inputs = Vec::new();
    for i in 0..3 {
        let mut features = Vec::new();
        for k in 1..6 {
            let v = [
                frames[k][i][0] - frames[k - 1][i][0],
                frames[k][i][1] - frames[k - 1][i][1],
            ];
            features.push((v[0] - v_mean[0]) / v_std[0]);
            features.push((v[1] - v_mean[1]) / v_std[1]);
        }
        let row = types[i].index();
        for c in 0..config.type_embed_dim {
            features.push(embed.values()[row * config.type_embed_dim + c]);
        }
        node_inputs.push(features);
    }

    // edges sorted by (sender, receiver): (0,1), (1,0), (1,2), (2,1)
    let edges = [(0usize, 1usize), (1, 0), (1, 2), (2, 1)];
    let built = flipgns::graph::build_graph(&frames[5], config.connectivity_radius);
    assert_eq!(
        built,
        edges.iter().map(|&(a, b)| (a as u32, b as u32)).collect::<Vec<_>>(),
        "fixture must form a path graph"
    );
    let now = &frames[5];
    let mut edge_inputs = Vec::new();
    for &(s, rcv) in &edges {
        let dx = (now[rcv][0] - now[s][0]) / r;
        let dy = (now[rcv][1] - now[s][1]) / r;
        edge_inputs.push(vec![dx, dy, (dx * dx + dy * dy).sqrt()]);
    }

    // encode
    let nodes: Vec<Vec<f64>> = node_inputs
        .iter()
        .map(|x| trace.mlp(&gns.node_encoder, x))
        .collect();
    let enc_edges: Vec<Vec<f64>> = edge_inputs
        .iter()
        .map(|x| trace.mlp(&gns.edge_encoder, x))
        .collect();

    // one interaction step
    let inter = &gns.interactions[0];
    let mut new_edges = Vec::new();
    for (e_idx, &(s, rcv)) in edges.iter().enumerate() {
        let mut input = enc_edges[e_idx].clone();
        input.extend_from_slice(&nodes[s]);
        input.extend_from_slice(&nodes[rcv]);
        let msg = trace.mlp(&inter.edge_update, &input);
        let updated: Vec<f64> = enc_edges[e_idx]
            .iter()
            .zip(&msg)
            .map(|(a, b)| a + b)
            .collect();
        new_edges.push(updated);
    }
    let mut new_nodes = Vec::new();
    for i in 0..3 {
        let mut agg = vec![0.0; config.latent];
        for (e_idx, &(_, rcv)) in edges.iter().enumerate() {
            if rcv == i {
                for c in 0..config.latent {
                    agg[c] += new_edges[e_idx][c];
                }
            }
        }
        let mut input = nodes[i].clone();
        input.extend_from_slice(&agg);
        let msg = trace.mlp(&inter.node_update, &input);
        let updated: Vec<f64> = nodes[i].iter().zip(&msg).map(|(a, b)| a + b).collect();
        new_nodes.push(updated);
    }

    // decode
    for i in 0..3 {
        let acc = trace.mlp(&gns.decoder, &new_nodes[i]);
        assert!(
            (acc[0] - got[i][0]).abs() < 1e-10 && (acc[1] - got[i][1]).abs() < 1e-10,
            "node {i}: trace {:?} vs model {:?}",
            acc,
            got[i]
        );
    }
}
