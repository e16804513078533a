//! Per-trajectory and aggregate metric reports: CSV rows with an aggregate
//! footer, a machine-readable JSON summary, and per-step curves.

use super::metrics::{emd_samples, mse_20, mse_400, mse_acc_1};
use super::rollout::{rollout, StepModel};
use crate::data::{Dataset, NormStats};
use crate::Result;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// How often (in rollout steps) EMD is sampled along full rollouts.
pub const EMD_SAMPLE_EVERY: usize = 10;

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryMetrics {
    pub name: String,
    pub emd: f64,
    pub mse_acc_1: f64,
    pub mse_20: f64,
    pub mse_400: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub per_trajectory: Vec<TrajectoryMetrics>,
    pub mean: TrajectoryMetrics,
    pub min: TrajectoryMetrics,
    pub max: TrajectoryMetrics,
    /// Per trajectory: full-rollout per-step position MSE.
    #[serde(skip)]
    pub mse_400_curves: Vec<Vec<f64>>,
    /// Per trajectory: (step, EMD) samples along the full rollout.
    #[serde(skip)]
    pub emd_curves: Vec<Vec<(usize, f64)>>,
}

fn fold(
    name: &str,
    rows: &[TrajectoryMetrics],
    pick: impl Fn(f64, f64) -> f64,
    init: f64,
) -> TrajectoryMetrics {
    let mut out = TrajectoryMetrics {
        name: name.to_string(),
        emd: init,
        mse_acc_1: init,
        mse_20: init,
        mse_400: init,
    };
    for r in rows {
        out.emd = pick(out.emd, r.emd);
        out.mse_acc_1 = pick(out.mse_acc_1, r.mse_acc_1);
        out.mse_20 = pick(out.mse_20, r.mse_20);
        out.mse_400 = pick(out.mse_400, r.mse_400);
    }
    out
}

/// All four metrics of one model over a dataset. Trajectories are evaluated
/// in parallel; aggregation order is fixed.
pub fn evaluate_model(
    model: &dyn StepModel,
    dataset: &Dataset,
    stats: &NormStats,
) -> Result<MetricReport> {
    let results: Vec<Result<(TrajectoryMetrics, Vec<f64>, Vec<(usize, f64)>)>> = dataset
        .trajectories
        .par_iter()
        .enumerate()
        .map(|(idx, traj)| {
            let acc1 = mse_acc_1(model, traj, stats)?;
            let m20 = mse_20(model, traj)?;
            let full = mse_400(model, traj)?;
            let frames = rollout(model, traj, traj.len() - 6)?.frames;
            let emd_curve = emd_samples(&frames, traj, 0, EMD_SAMPLE_EVERY)?;
            let emd_mean = if emd_curve.is_empty() {
                0.0
            } else {
                emd_curve.iter().map(|(_, v)| v).sum::<f64>() / emd_curve.len() as f64
            };
            Ok((
                TrajectoryMetrics {
                    name: dataset.manifest.files.get(idx).cloned().unwrap_or_else(|| format!("traj_{idx}")),
                    emd: emd_mean,
                    mse_acc_1: acc1,
                    mse_20: m20,
                    mse_400: full.mean,
                },
                full.curve,
                emd_curve,
            ))
        })
        .collect();

    let mut per_trajectory = Vec::new();
    let mut mse_400_curves = Vec::new();
    let mut emd_curves = Vec::new();
    for r in results {
        let (row, curve, emd_curve) = r?;
        per_trajectory.push(row);
        mse_400_curves.push(curve);
        emd_curves.push(emd_curve);
    }
    let n = per_trajectory.len().max(1) as f64;
    let mut mean = fold("mean", &per_trajectory, |a, b| a + b, 0.0);
    mean.emd /= n;
    mean.mse_acc_1 /= n;
    mean.mse_20 /= n;
    mean.mse_400 /= n;
    let min = fold("min", &per_trajectory, f64::min, f64::INFINITY);
    let max = fold("max", &per_trajectory, f64::max, f64::NEG_INFINITY);
    Ok(MetricReport {
        per_trajectory,
        mean,
        min,
        max,
        mse_400_curves,
        emd_curves,
    })
}

impl MetricReport {
    /// One row per trajectory, aggregate rows as footer.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "trajectory,emd,mse_acc_1,mse_20,mse_400")?;
        for row in self
            .per_trajectory
            .iter()
            .chain([&self.mean, &self.min, &self.max])
        {
            writeln!(
                w,
                "{},{:.12e},{:.12e},{:.12e},{:.12e}",
                row.name, row.emd, row.mse_acc_1, row.mse_20, row.mse_400
            )?;
        }
        Ok(())
    }

    pub fn write_summary_json(&self, path: &Path) -> Result<()> {
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| crate::Error::Format(format!("report encode: {e}")))?;
        std::fs::write(path, body)?;
        Ok(())
    }

    /// Per-step curves: full-rollout MSE and sampled EMD, one file per kind.
    pub fn write_curves_csv(&self, dir: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join("mse400_curves.csv"))?);
        writeln!(w, "trajectory,step,mse")?;
        for (idx, curve) in self.mse_400_curves.iter().enumerate() {
            for (k, v) in curve.iter().enumerate() {
                writeln!(w, "{},{k},{v:.12e}", self.per_trajectory[idx].name)?;
            }
        }
        let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join("emd_curves.csv"))?);
        writeln!(w, "trajectory,step,emd")?;
        for (idx, curve) in self.emd_curves.iter().enumerate() {
            for (k, v) in curve {
                writeln!(w, "{},{k},{v:.12e}", self.per_trajectory[idx].name)?;
            }
        }
        Ok(())
    }
}
