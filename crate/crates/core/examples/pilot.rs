//! Timing pilot for the desk-scale training criterion.
use flipgns::data::{generate_dataset, Dataset, GenOptions};
use flipgns::flip::{SceneSpec, SimConfig};
use flipgns::graph::ModelConfig;
use flipgns::train::{train, MemorySink, TrainConfig, TrainVariant, VariantConfig};
use std::time::Instant;

fn main() {
    let dir = std::env::temp_dir().join("flipgns_pilot");
    let _ = std::fs::remove_dir_all(&dir);
    let t0 = Instant::now();
    let opts = GenOptions {
        trajectories: 10,
        seed: 42,
        scene: SceneSpec::desk(),
        sim: SimConfig::default(),
        boundary_particles: false,
        boundary_spacing: 1.0,
    };
    generate_dataset(&dir, &opts).unwrap();
    let dataset = Dataset::load(&dir).unwrap();
    println!("gen: {:.1}s", t0.elapsed().as_secs_f64());
    let counts: Vec<usize> = dataset.trajectories.iter().map(|t| t.particle_count()).collect();
    println!("particle counts: {counts:?}");

    let steps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let cfg = TrainConfig {
        total_steps: steps,
        checkpoint_interval: steps,
        seed: 1,
        ..TrainConfig::default()
    };
    let t1 = Instant::now();
    let mut sink = MemorySink::default();
    train(
        &VariantConfig::new(TrainVariant::OneStep),
        &dataset,
        &ModelConfig::desk(),
        &cfg,
        None,
        &mut sink,
    )
    .unwrap();
    let dt = t1.elapsed().as_secs_f64();
    println!("train {} steps: {:.1}s ({:.1} ms/step)", steps, dt, dt * 1000.0 / steps as f64);
    let around_100: f64 = sink.records[90.min(sink.records.len() - 1)..110.min(sink.records.len())]
        .iter()
        .map(|r| r.loss)
        .sum::<f64>()
        / 20.0;
    let late: f64 = sink.records[sink.records.len().saturating_sub(100)..]
        .iter()
        .map(|r| r.loss)
        .sum::<f64>()
        / 100.0;
    println!("loss@100 {around_100:.4} last100 {late:.4} ratio {:.2}", around_100 / late);

    // held-out MSE 20 vs zero-acceleration baseline
    use flipgns::eval::{mse_20, StepModel, ZeroAcceleration};
    use flipgns::graph::GnsModel;
    let held_dir = std::env::temp_dir().join("flipgns_pilot_held");
    let _ = std::fs::remove_dir_all(&held_dir);
    let held_opts = GenOptions {
        trajectories: 3,
        seed: 777,
        scene: SceneSpec::desk(),
        sim: SimConfig::default(),
        boundary_particles: false,
        boundary_spacing: 1.0,
    };
    generate_dataset(&held_dir, &held_opts).unwrap();
    let held = Dataset::load(&held_dir).unwrap();
    let ckpt = sink.checkpoints.last().unwrap();
    let model = GnsModel::new(ckpt.gns.clone(), ckpt.stats, held.trajectories[0].bounds());
    let baseline = ZeroAcceleration { stats: ckpt.stats };
    let mut model_mse = 0.0;
    let mut base_mse = 0.0;
    let t2 = Instant::now();
    for traj in &held.trajectories {
        model_mse += mse_20(&model as &dyn StepModel, traj).unwrap();
        base_mse += mse_20(&baseline as &dyn StepModel, traj).unwrap();
    }
    println!(
        "held-out mse20: model {:.4e} baseline {:.4e} ratio {:.2} (eval {:.1}s)",
        model_mse / 3.0,
        base_mse / 3.0,
        base_mse / model_mse,
        t2.elapsed().as_secs_f64()
    );
}
// extended: held-out MSE-20 vs zero-acceleration baseline
