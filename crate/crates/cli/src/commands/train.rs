use crate::config::{prepare_out_dir, resolve};
use crate::Profile;
use flipgns::data::Dataset;
use flipgns::eval::{evaluate_model, validation_mse_400};
use flipgns::graph::GnsModel;
use flipgns::train::{
    train, Checkpoint, RunDirSink, StepRecord, TrainSink, TrainVariant, VariantConfig,
};
use flipgns::{Error, Result};
use std::io::Write;
use std::path::Path;

/// Wraps the run-dir sink with periodic validation screening: every
/// checkpoint is scored with all four metrics on the validation set.
struct ScreeningSink<'a> {
    inner: RunDirSink,
    validation: Option<&'a Dataset>,
    screening: Option<std::io::BufWriter<std::fs::File>>,
}

impl TrainSink for ScreeningSink<'_> {
    fn on_step(&mut self, record: &StepRecord) -> Result<()> {
        self.inner.on_step(record)
    }

    fn on_checkpoint(&mut self, checkpoint: &Checkpoint) -> Result<()> {
        self.inner.on_checkpoint(checkpoint)?;
        if let (Some(validation), Some(out)) = (self.validation, self.screening.as_mut()) {
            let bounds = validation.trajectories[0].bounds();
            let model = GnsModel::new(checkpoint.gns.clone(), checkpoint.stats, bounds);
            let report = evaluate_model(&model, validation, &checkpoint.stats)?;
            writeln!(
                out,
                "{},{:.10e},{:.10e},{:.10e},{:.10e}",
                checkpoint.step,
                report.mean.emd,
                report.mean.mse_acc_1,
                report.mean.mse_20,
                report.mean.mse_400
            )?;
            out.flush()?;
        }
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    data: &Path,
    out: &Path,
    variant: TrainVariant,
    seed: u64,
    profile: Profile,
    config: Option<&Path>,
    steps: Option<u64>,
    pretrained: Option<&Path>,
    val: Option<&Path>,
    force: bool,
) -> Result<()> {
    let resolved = resolve(profile, config)?;
    let dataset = Dataset::load(data)?;
    let validation = val.map(Dataset::load).transpose()?;

    let mut variant_cfg = VariantConfig::new(variant);
    variant_cfg.unroll_steps = resolved.unroll_steps;
    if let Some(noise) = resolved.noise {
        if variant.uses_noise() {
            variant_cfg.noise = noise;
        }
    }
    let mut model_cfg = resolved.model.clone();
    if variant.boundary_particles() {
        model_cfg.boundary_features = false;
    }
    let mut train_cfg = resolved.train.clone();
    train_cfg.seed = seed;
    if let Some(steps) = steps {
        train_cfg.total_steps = steps;
        train_cfg.checkpoint_interval = train_cfg.checkpoint_interval.min(steps.max(1));
    }

    let donor = match pretrained {
        Some(path) => Some(Checkpoint::load(path)?),
        None => {
            if variant.requires_pretrained() {
                return Err(Error::Contract(format!(
                    "variant {} needs --pretrained",
                    variant.short_name()
                )));
            }
            None
        }
    };

    prepare_out_dir(out, force)?;
    // config snapshot for reproducibility
    let snapshot = format!(
        "variant = \"{}\"\nseed = {}\n\n[train]\nbatch_size = {}\ntotal_steps = {}\ncheckpoint_interval = {}\nlr_start = {:e}\nlr_floor = {:e}\ndecay_steps = {}\nunroll_steps = {}\n\n[noise]\nenabled = {}\naccumulated_position_std = {:e}\n\n[model]\nlatent = {}\nmessage_passing_steps = {}\nconnectivity_radius = {}\nboundary_features = {}\n",
        variant.short_name(),
        seed,
        train_cfg.batch_size,
        train_cfg.total_steps,
        train_cfg.checkpoint_interval,
        train_cfg.schedule.lr_start,
        train_cfg.schedule.lr_floor,
        train_cfg.schedule.decay_steps,
        variant_cfg.unroll_steps,
        variant_cfg.noise.enabled,
        variant_cfg.noise.accumulated_position_std,
        model_cfg.latent,
        model_cfg.message_passing_steps,
        model_cfg.connectivity_radius,
        model_cfg.boundary_features,
    );
    std::fs::write(out.join("config.toml"), snapshot)?;

    let screening = match &validation {
        Some(_) => {
            let mut w = std::io::BufWriter::new(std::fs::File::create(out.join("screening.csv"))?);
            writeln!(w, "step,emd,mse_acc_1,mse_20,mse_400")?;
            Some(w)
        }
        None => None,
    };
    let mut sink = ScreeningSink {
        inner: RunDirSink::create(out)?,
        validation: validation.as_ref(),
        screening,
    };
    let final_ckpt = train(
        &variant_cfg,
        &dataset,
        &model_cfg,
        &train_cfg,
        donor.as_ref(),
        &mut sink,
    )?;
    if let Some(validation) = &validation {
        let bounds = validation.trajectories[0].bounds();
        let model = GnsModel::new(final_ckpt.gns.clone(), final_ckpt.stats, bounds);
        let score = validation_mse_400(&model, &validation.trajectories)?;
        println!("final validation mse_400: {score:.6e}");
    }
    println!(
        "trained variant {} for {} steps; run directory: {}",
        variant.short_name(),
        train_cfg.total_steps,
        out.display()
    );
    Ok(())
}
