use crate::config::{prepare_out_dir, resolve};
use crate::Profile;
use flipgns::data::Trajectory;
use flipgns::eval::{generalization_experiment, render_frame};
use flipgns::flip::simulate_trajectory;
use flipgns::graph::GnsModel;
use flipgns::rng::{derive_seed, stream};
use flipgns::train::Checkpoint;
use flipgns::Result;
use std::path::Path;

#[allow(clippy::too_many_arguments)]
pub fn run(
    out: &Path,
    checkpoint_1sn: &Path,
    checkpoint_1snb: &Path,
    scenes: usize,
    seed: u64,
    profile: Profile,
    config: Option<&Path>,
    force: bool,
) -> Result<()> {
    let resolved = resolve(profile, config)?;
    let tall_spec = resolved.scene.clone().tall();
    prepare_out_dir(out, force)?;

    // ground truth on the extended domain
    let tall: Vec<Trajectory> = (0..scenes)
        .map(|i| {
            simulate_trajectory(
                derive_seed(seed, stream::SCENE, 1000 + i as u64),
                &tall_spec,
                &resolved.sim,
            )
        })
        .collect::<Result<_>>()?;

    let ckpt_sn = Checkpoint::load(checkpoint_1sn)?;
    let ckpt_snb = Checkpoint::load(checkpoint_1snb)?;
    let bounds = tall[0].bounds();
    let model_sn = GnsModel::new(ckpt_sn.gns.clone(), ckpt_sn.stats, bounds);
    let model_snb = GnsModel::new(ckpt_snb.gns.clone(), ckpt_snb.stats, bounds);
    let report = generalization_experiment(
        &[("1sn", &model_sn), ("1snb", &model_snb)],
        &tall,
        10,
    )?;
    report.write_emd_csv(&out.join("emd.csv"))?;

    // frames with the original-domain guideline
    for scene in &report.scenes {
        for ((name, frames), eval_traj) in scene.rollouts.iter().zip(&scene.eval_trajectories) {
            let steps = frames.len();
            for &k in &[0usize, steps / 2, steps.saturating_sub(1)] {
                render_frame(
                    &out.join(format!("{}_{name}_step{k:03}.png", scene.scene)),
                    &frames[k],
                    &eval_traj.types,
                    eval_traj.bounds(),
                    Some(report.original_domain_top),
                )?;
            }
            render_frame(
                &out.join(format!("{}_gt_final.png", scene.scene)),
                &eval_traj.frames[eval_traj.len() - 1],
                &eval_traj.types,
                eval_traj.bounds(),
                Some(report.original_domain_top),
            )?;
        }
    }
    println!(
        "generalization report over {} tall scenes written to {}",
        scenes,
        out.display()
    );
    Ok(())
}
