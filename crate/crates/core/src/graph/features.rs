//! Node and edge feature construction on the autodiff tape, so gradients can
//! flow from predicted positions into the next prediction during unrolled
//! training.
//!
//! Node vector: 5 normalized velocities (10), learned type embedding, and —
//! unless disabled — distances to the four walls in units of the connectivity
//! radius, clipped at the radius by default. Edge vector: receiver-minus-
//! sender displacement divided by the radius, plus its magnitude.

use super::build::build_graph;
use super::model::GnsParams;
use crate::data::{NormStats, ScaledBounds};
use crate::tensor::{Tape, Var};
use crate::{Error, ParticleType, Result};

#[derive(Debug, Clone, Copy)]
pub struct FeatureContext<'a> {
    pub stats: &'a NormStats,
    pub bounds: ScaledBounds,
}

pub struct GraphInputs {
    pub senders: Vec<usize>,
    pub receivers: Vec<usize>,
    pub node_features: Var,
    pub edge_features: Var,
}

/// Build graph and features from a window of six position tensors ([N,2]
/// each, oldest first). The graph is built from the newest positions.
pub fn build_features(
    tape: &mut Tape,
    ctx: &FeatureContext,
    gns: &GnsParams,
    window: &[Var; 6],
    types: &[ParticleType],
) -> Result<GraphInputs> {
    let n = types.len();
    for w in window {
        let (rows, cols) = tape.shape(*w);
        if rows != n || cols != 2 {
            return Err(Error::shape("feature window", format!("[{n},2]"), format!("[{rows},{cols}]")));
        }
    }
    let cfg = &gns.config;
    let radius = cfg.connectivity_radius;

    // graph from the newest positions
    let now = window[5];
    let positions: Vec<crate::Vec2> = {
        let v = tape.value(now);
        (0..n).map(|i| [v[i * 2], v[i * 2 + 1]]).collect()
    };
    let edges = build_graph(&positions, radius);
    let senders: Vec<usize> = edges.iter().map(|e| e.0 as usize).collect();
    let receivers: Vec<usize> = edges.iter().map(|e| e.1 as usize).collect();

    // normalized velocity history
    let v_mean = ctx.stats.velocity.mean;
    let v_std = ctx.stats.velocity_std()?;
    let v_scale = [1.0 / v_std[0], 1.0 / v_std[1]];
    let v_shift = [-v_mean[0] / v_std[0], -v_mean[1] / v_std[1]];
    let mut parts: Vec<Var> = Vec::with_capacity(7);
    for k in 1..6 {
        let v = tape.sub(window[k], window[k - 1])?;
        parts.push(tape.col_affine(v, &v_scale, &v_shift)?);
    }

    // learned per-type embedding
    let table = tape.param(&gns.params, gns.type_embedding);
    let type_rows: Vec<usize> = types.iter().map(|t| t.index()).collect();
    parts.push(tape.gather_rows(table, &type_rows)?);

    // wall distances in radius units
    if cfg.boundary_features {
        let b = ctx.bounds;
        let inv_r = 1.0 / radius;
        let low = tape.col_affine(now, &[inv_r, inv_r], &[-b.x.0 * inv_r, -b.y.0 * inv_r])?;
        let high = tape.col_affine(now, &[-inv_r, -inv_r], &[b.x.1 * inv_r, b.y.1 * inv_r])?;
        let dists = tape.concat_cols(&[low, high])?; // [left, bottom, right, top]
        parts.push(if cfg.clip_boundary_at_radius {
            tape.clamp(dists, -1.0, 1.0)
        } else {
            dists
        });
    }
    let node_features = tape.concat_cols(&parts)?;

    // edge displacement in radius units + its magnitude
    let p_s = tape.gather_rows(now, &senders)?;
    let p_r = tape.gather_rows(now, &receivers)?;
    let disp = tape.sub(p_r, p_s)?;
    let disp = tape.scale(disp, 1.0 / radius);
    let mag = tape.row_norm(disp);
    let edge_features = tape.concat_cols(&[disp, mag])?;

    Ok(GraphInputs {
        senders,
        receivers,
        node_features,
        edge_features,
    })
}
