//! Operator entry point tying the pipeline together: dataset generation,
//! training, evaluation, and the domain-generalization experiment.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use flipgns::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "flipgns", version, about = "2D fluid trajectories, graph network training, rollout metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Profile {
    /// Small scenes, shrunk model, fast runs.
    Desk,
    /// Full-scale distribution and architecture.
    Paper,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded trajectory dataset with online statistics.
    GenData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trajectories: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "desk")]
        profile: Profile,
        /// TOML config overriding profile defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Represent the domain walls as obstacle particles.
        #[arg(long)]
        boundary_particles: bool,
        /// Double-height domain.
        #[arg(long)]
        tall: bool,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        force: bool,
    },
    /// Train a model variant on a dataset.
    Train {
        /// Dataset directory or manifest path.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = flipgns::train::TrainVariant::parse)]
        variant: flipgns::train::TrainVariant,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "desk")]
        profile: Profile,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override total training steps.
        #[arg(long)]
        steps: Option<u64>,
        /// Donor checkpoint (required for variant 2si).
        #[arg(long)]
        pretrained: Option<PathBuf>,
        /// Validation dataset for periodic screening.
        #[arg(long)]
        val: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        force: bool,
    },
    /// Evaluate checkpoints on a dataset with all four metrics.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// One or more checkpoints; each gets its own report row.
        #[arg(long, required = true)]
        checkpoint: Vec<PathBuf>,
        /// Also write PNG frames of rollouts.
        #[arg(long)]
        render: bool,
        /// Also write the neighbor-count analysis at this radius.
        #[arg(long)]
        neighbor_radius: Option<f64>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        force: bool,
    },
    /// Domain-generalization experiment on double-height scenes.
    Generalize {
        #[arg(long)]
        out: PathBuf,
        /// Checkpoint of the wall-distance-feature model (1sn).
        #[arg(long)]
        checkpoint_1sn: PathBuf,
        /// Checkpoint of the boundary-particle model (1snb).
        #[arg(long)]
        checkpoint_1snb: PathBuf,
        #[arg(long, default_value_t = 2)]
        scenes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "desk")]
        profile: Profile,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        force: bool,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Contract(_) | Error::CheckpointMismatch(_) | Error::Shape { .. } => 2,
        Error::Io(_) | Error::Format(_) | Error::UnsatisfiableSpec(_) => 3,
        Error::SimulationDiverged(_)
        | Error::RolloutDiverged { .. }
        | Error::PressureNoConvergence { .. }
        | Error::NonFiniteLoss { .. }
        | Error::NonFiniteGradient { .. } => 4,
    }
}

fn configure_jobs(jobs: usize) {
    if jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData {
            out,
            trajectories,
            seed,
            profile,
            config,
            boundary_particles,
            tall,
            jobs,
            force,
        } => {
            configure_jobs(jobs);
            commands::gen_data::run(
                &out,
                trajectories,
                seed,
                profile,
                config.as_deref(),
                boundary_particles,
                tall,
                force,
            )
        }
        Command::Train {
            data,
            out,
            variant,
            seed,
            profile,
            config,
            steps,
            pretrained,
            val,
            jobs,
            force,
        } => {
            configure_jobs(jobs);
            commands::train::run(
                &data,
                &out,
                variant,
                seed,
                profile,
                config.as_deref(),
                steps,
                pretrained.as_deref(),
                val.as_deref(),
                force,
            )
        }
        Command::Eval {
            data,
            out,
            checkpoint,
            render,
            neighbor_radius,
            jobs,
            force,
        } => {
            configure_jobs(jobs);
            commands::eval::run(&data, &out, &checkpoint, render, neighbor_radius, force)
        }
        Command::Generalize {
            out,
            checkpoint_1sn,
            checkpoint_1snb,
            scenes,
            seed,
            profile,
            config,
            jobs,
            force,
        } => {
            configure_jobs(jobs);
            commands::generalize::run(
                &out,
                &checkpoint_1sn,
                &checkpoint_1snb,
                scenes,
                seed,
                profile,
                config.as_deref(),
                force,
            )
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
