use crate::config::prepare_out_dir;
use flipgns::data::Dataset;
use flipgns::eval::{evaluate_model, neighbor_stats, render_frame, rollout};
use flipgns::graph::GnsModel;
use flipgns::train::Checkpoint;
use flipgns::Result;
use std::io::Write;
use std::path::Path;

pub fn run(
    data: &Path,
    out: &Path,
    checkpoints: &[std::path::PathBuf],
    render: bool,
    neighbor_radius: Option<f64>,
    force: bool,
) -> Result<()> {
    let dataset = Dataset::load(data)?;
    prepare_out_dir(out, force)?;

    let mut summary = std::io::BufWriter::new(std::fs::File::create(out.join("summary.csv"))?);
    writeln!(summary, "variant,emd,mse_acc_1,mse_20,mse_400")?;

    let mut used_labels = std::collections::HashSet::new();
    for path in checkpoints {
        let ckpt = Checkpoint::load(path)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "checkpoint".into());
        let mut label = stem.clone();
        let mut k = 2;
        while !used_labels.insert(label.clone()) {
            label = format!("{stem}_{k}");
            k += 1;
        }
        let bounds = dataset.trajectories[0].bounds();
        let model = GnsModel::new(ckpt.gns.clone(), ckpt.stats, bounds);
        let report = evaluate_model(&model, &dataset, &ckpt.stats)?;

        let sub = out.join(&label);
        std::fs::create_dir_all(&sub)?;
        report.write_csv(&sub.join("report.csv"))?;
        report.write_summary_json(&sub.join("report.json"))?;
        report.write_curves_csv(&sub)?;
        writeln!(
            summary,
            "{label},{:.10e},{:.10e},{:.10e},{:.10e}",
            report.mean.emd, report.mean.mse_acc_1, report.mean.mse_20, report.mean.mse_400
        )?;

        if render {
            let renders = sub.join("renders");
            std::fs::create_dir_all(&renders)?;
            for (idx, traj) in dataset.trajectories.iter().enumerate() {
                let steps = traj.len() - 6;
                let result = rollout(&model, traj, steps)?;
                for &k in &[0usize, steps / 2, steps - 1] {
                    render_frame(
                        &renders.join(format!("traj{idx:02}_step{k:03}_pred.png")),
                        &result.frames[k],
                        &traj.types,
                        traj.bounds(),
                        None,
                    )?;
                    render_frame(
                        &renders.join(format!("traj{idx:02}_step{k:03}_gt.png")),
                        &traj.frames[6 + k],
                        &traj.types,
                        traj.bounds(),
                        None,
                    )?;
                }
            }
        }
        println!(
            "{label}: emd {:.4e}  mse_acc_1 {:.4e}  mse_20 {:.4e}  mse_400 {:.4e}",
            report.mean.emd, report.mean.mse_acc_1, report.mean.mse_20, report.mean.mse_400
        );
    }

    if let Some(radius) = neighbor_radius {
        let analysis = neighbor_stats(&dataset.trajectories, radius)?;
        analysis.write_csv(&out.join("neighbors.csv"))?;
        let frames = analysis.mean_per_frame.len();
        if frames > 1 {
            println!(
                "neighbor analysis at radius {radius}: mean {:.2} -> {:.2} over {frames} frames",
                analysis.mean_per_frame[frames.min(100) - 1],
                analysis.mean_per_frame[frames - 1]
            );
        }
    }
    Ok(())
}
