//! The graph network simulator: configuration, parameters, forward pass and
//! the Euler integrator that turns predicted accelerations into positions.

use super::features::{build_features, FeatureContext, GraphInputs};
use crate::data::{denormalize, NormStats, ScaledBounds};
use crate::rng::{rng_for, stream};
use crate::tensor::{MlpParams, ParamId, ParamSet, Tape, Tensor, Var};
use crate::{Error, ParticleType, Result, Vec2};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Latent width; MLP hidden layers share it.
    pub latent: usize,
    pub hidden_layers: usize,
    pub message_passing_steps: usize,
    /// Scaled units.
    pub connectivity_radius: f64,
    /// Wall-distance node features; off for the boundary-particle variant.
    pub boundary_features: bool,
    pub clip_boundary_at_radius: bool,
    pub type_embed_dim: usize,
}

impl ModelConfig {
    /// Full-size architecture.
    pub fn full() -> Self {
        ModelConfig {
            latent: 128,
            hidden_layers: 2,
            message_passing_steps: 10,
            connectivity_radius: 0.03,
            boundary_features: true,
            clip_boundary_at_radius: true,
            type_embed_dim: 16,
        }
    }

    /// Shrunk architecture for desk-scale runs; the radius keeps roughly ten
    /// mean neighbors at four particles per cell.
    pub fn desk() -> Self {
        ModelConfig {
            latent: 32,
            hidden_layers: 2,
            message_passing_steps: 3,
            connectivity_radius: 0.022,
            boundary_features: true,
            clip_boundary_at_radius: true,
            type_embed_dim: 16,
        }
    }

    pub fn node_input_dim(&self) -> usize {
        10 + self.type_embed_dim + if self.boundary_features { 4 } else { 0 }
    }

    pub fn edge_input_dim(&self) -> usize {
        3
    }

    fn mlp_dims(&self, input: usize, output: usize) -> Vec<usize> {
        let mut dims = vec![input];
        dims.extend(std::iter::repeat(self.latent).take(self.hidden_layers));
        dims.push(output);
        dims
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Interaction {
    pub edge_update: MlpParams,
    pub node_update: MlpParams,
}

/// All learnable weights plus the architecture they belong to.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GnsParams {
    pub config: ModelConfig,
    pub params: ParamSet,
    pub node_encoder: MlpParams,
    pub edge_encoder: MlpParams,
    pub interactions: Vec<Interaction>,
    pub decoder: MlpParams,
    pub type_embedding: ParamId,
}

impl GnsParams {
    pub fn init(config: &ModelConfig, seed: u64) -> Self {
        let mut rng = rng_for(seed, stream::INIT, 0);
        let mut params = ParamSet::new();
        let latent = config.latent;
        let node_encoder = MlpParams::init(
            &mut params,
            "node_encoder",
            &config.mlp_dims(config.node_input_dim(), latent),
            true,
            &mut rng,
        );
        let edge_encoder = MlpParams::init(
            &mut params,
            "edge_encoder",
            &config.mlp_dims(config.edge_input_dim(), latent),
            true,
            &mut rng,
        );
        let interactions = (0..config.message_passing_steps)
            .map(|k| Interaction {
                edge_update: MlpParams::init(
                    &mut params,
                    &format!("interaction{k}/edge"),
                    &config.mlp_dims(3 * latent, latent),
                    false,
                    &mut rng,
                ),
                node_update: MlpParams::init(
                    &mut params,
                    &format!("interaction{k}/node"),
                    &config.mlp_dims(2 * latent, latent),
                    false,
                    &mut rng,
                ),
            })
            .collect();
        let decoder = MlpParams::init(
            &mut params,
            "decoder",
            &config.mlp_dims(latent, 2),
            false,
            &mut rng,
        );
        let embed: Vec<f64> = (0..2 * config.type_embed_dim)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let type_embedding = params.add(
            "type_embedding",
            Tensor::new(vec![2, config.type_embed_dim], embed).unwrap(),
        );
        GnsParams {
            config: config.clone(),
            params,
            node_encoder,
            edge_encoder,
            interactions,
            decoder,
            type_embedding,
        }
    }
}

/// Encode-process-decode on a particle graph; returns normalized
/// accelerations, one row per node.
///
/// Each processor step computes
///   e' = e + EdgeMlp([e, n_sender, n_receiver])
///   n' = n + NodeMlp([n, sum of incoming e'])
/// with element-wise sum aggregation; isolated nodes aggregate zero.
pub fn gns_forward(tape: &mut Tape, gns: &GnsParams, inputs: &GraphInputs) -> Result<Var> {
    let params = &gns.params;
    let mut nodes = gns.node_encoder.forward(tape, params, inputs.node_features)?;
    let mut edges = gns.edge_encoder.forward(tape, params, inputs.edge_features)?;
    let n_nodes = tape.shape(nodes).0;
    for interaction in &gns.interactions {
        let n_s = tape.gather_rows(nodes, &inputs.senders)?;
        let n_r = tape.gather_rows(nodes, &inputs.receivers)?;
        let edge_in = tape.concat_cols(&[edges, n_s, n_r])?;
        let edge_msg = interaction.edge_update.forward(tape, params, edge_in)?;
        edges = tape.add(edges, edge_msg)?;
        let agg = tape.scatter_add_rows(edges, &inputs.receivers, n_nodes)?;
        let node_in = tape.concat_cols(&[nodes, agg])?;
        let node_msg = interaction.node_update.forward(tape, params, node_in)?;
        nodes = tape.add(nodes, node_msg)?;
    }
    gns.decoder.forward(tape, params, nodes)
}

/// Semi-implicit Euler in per-step units: v' = v + a, p' = p + v'.
pub fn euler_update(p: Vec2, v: Vec2, acc_norm: Vec2, stats: &NormStats) -> Result<(Vec2, Vec2)> {
    let a = denormalize(acc_norm, stats.acceleration.mean, stats.acceleration_std()?);
    let v_next = [v[0] + a[0], v[1] + a[1]];
    let p_next = [p[0] + v_next[0], p[1] + v_next[1]];
    Ok((p_next, v_next))
}

/// Parameters bundled with the normalization statistics and domain bounds
/// they were trained with; the inference-side unit.
#[derive(Debug, Clone)]
pub struct GnsModel {
    pub gns: GnsParams,
    pub stats: NormStats,
    pub bounds: ScaledBounds,
}

impl GnsModel {
    pub fn new(gns: GnsParams, stats: NormStats, bounds: ScaledBounds) -> Self {
        GnsModel { gns, stats, bounds }
    }

    /// Override the domain bounds (extended-domain evaluation).
    pub fn with_bounds(mut self, bounds: ScaledBounds) -> Self {
        self.bounds = bounds;
        self
    }

    /// Normalized per-particle accelerations for a six-frame window.
    pub fn accelerations_normalized(
        &self,
        window: &[&[Vec2]; 6],
        types: &[ParticleType],
    ) -> Result<Vec<Vec2>> {
        let mut tape = Tape::new();
        let vars: [Var; 6] = {
            let mut it = window.iter().map(|f| tape.constant_rows(f));
            std::array::from_fn(|_| it.next().unwrap())
        };
        let ctx = FeatureContext {
            stats: &self.stats,
            bounds: self.bounds,
        };
        let inputs = build_features(&mut tape, &ctx, &self.gns, &vars, types)?;
        let acc = gns_forward(&mut tape, &self.gns, &inputs)?;
        let values = tape.value(acc);
        Ok((0..types.len())
            .map(|i| [values[i * 2], values[i * 2 + 1]])
            .collect())
    }

    /// One prediction step: returns next positions. Fluid particles get the
    /// Euler update; obstacle particles are copied through unchanged.
    pub fn step_positions(&self, window: &[&[Vec2]; 6], types: &[ParticleType]) -> Result<Vec<Vec2>> {
        let acc = self.accelerations_normalized(window, types)?;
        let now = window[5];
        let prev = window[4];
        let mut out = Vec::with_capacity(types.len());
        for i in 0..types.len() {
            if types[i] == ParticleType::Obstacle {
                out.push(now[i]);
                continue;
            }
            let v = [now[i][0] - prev[i][0], now[i][1] - prev[i][1]];
            let (p_next, _) = euler_update(now[i], v, acc[i], &self.stats)?;
            if !p_next[0].is_finite() || !p_next[1].is_finite() {
                return Err(Error::SimulationDiverged(format!(
                    "non-finite prediction for particle {i}"
                )));
            }
            out.push(p_next);
        }
        Ok(out)
    }
}
