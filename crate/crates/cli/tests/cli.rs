//! End-to-end runs of the binary with tiny settings: determinism of data
//! generation, run-dir protection, exit codes, and report shape.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flipgns"))
}

fn write_tiny_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("tiny.toml");
    std::fs::write(
        &path,
        r#"
[scene]
domain = [32, 32]
steps = 30
dt = 0.05
max_particles = 120
pool_probability = 0.2
pool_height = [2, 2]
block_size = [2, 3]
multi_block_probability = 0.3
block_count = [2, 3]
obstacle_probability = 0.5
obstacle_count = [1, 2]
obstacle_length = [2.0, 6.0]
obstacle_rotation = [0.0, 90.0]
initial_velocity_probability = 0.3
initial_velocity = [-5.0, 5.0]

[model]
latent = 8
hidden_layers = 2
message_passing_steps = 1
connectivity_radius = 0.022
boundary_features = true
clip_boundary_at_radius = true
type_embed_dim = 4

[train]
batch_size = 2
total_steps = 8
checkpoint_interval = 4
lr_start = 1e-4
lr_floor = 1e-6
decay_steps = 100000
unroll_steps = 1
"#,
    )
    .unwrap();
    path
}

fn run_ok(cmd: &mut Command) {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn pipeline_runs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let data_a = dir.path().join("data_a");
    let data_b = dir.path().join("data_b");
    for data in [&data_a, &data_b] {
        run_ok(bin().args([
            "gen-data",
            "--out",
            data.to_str().unwrap(),
            "--trajectories",
            "2",
            "--seed",
            "5",
            "--config",
            config.to_str().unwrap(),
        ]));
    }
    // identical seeds -> byte-identical dataset directories
    for name in ["manifest.json", "traj_0000.bin", "traj_0001.bin"] {
        let a = std::fs::read(data_a.join(name)).unwrap();
        let b = std::fs::read(data_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    // refuse to overwrite without --force
    let out = bin()
        .args([
            "gen-data",
            "--out",
            data_a.to_str().unwrap(),
            "--trajectories",
            "1",
            "--seed",
            "5",
            "--config",
            config.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "config error exit code");

    let run_dir = dir.path().join("run");
    run_ok(bin().args([
        "train",
        "--data",
        data_a.to_str().unwrap(),
        "--out",
        run_dir.to_str().unwrap(),
        "--variant",
        "1s",
        "--seed",
        "3",
        "--config",
        config.to_str().unwrap(),
    ]));
    assert!(run_dir.join("metrics.csv").exists());
    assert!(run_dir.join("config.toml").exists());
    let ckpt = run_dir.join("ckpt_0000008.bin");
    assert!(ckpt.exists());

    let eval_dir = dir.path().join("eval");
    run_ok(bin().args([
        "eval",
        "--data",
        data_a.to_str().unwrap(),
        "--out",
        eval_dir.to_str().unwrap(),
        "--checkpoint",
        ckpt.to_str().unwrap(),
    ]));
    let summary = std::fs::read_to_string(eval_dir.join("summary.csv")).unwrap();
    assert!(summary.starts_with("variant,emd,mse_acc_1,mse_20,mse_400"));
    assert_eq!(summary.lines().count(), 2);
    let report = eval_dir.join("ckpt_0000008").join("report.csv");
    let report_body = std::fs::read_to_string(report).unwrap();
    // 2 trajectories + mean/min/max footer
    assert_eq!(report_body.lines().count(), 1 + 2 + 3);
}

#[test]
fn missing_pretrained_for_2si_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let data = dir.path().join("data");
    run_ok(bin().args([
        "gen-data",
        "--out",
        data.to_str().unwrap(),
        "--trajectories",
        "1",
        "--seed",
        "2",
        "--config",
        config.to_str().unwrap(),
    ]));
    let out = bin()
        .args([
            "train",
            "--data",
            data.to_str().unwrap(),
            "--out",
            dir.path().join("run").to_str().unwrap(),
            "--variant",
            "2si",
            "--config",
            config.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--pretrained"));
}

#[test]
fn unknown_variant_is_rejected_by_the_parser() {
    let out = bin()
        .args(["train", "--data", "x", "--out", "y", "--variant", "4s"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
