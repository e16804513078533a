use crate::config::{prepare_out_dir, resolve};
use crate::Profile;
use flipgns::data::generate_dataset;
use flipgns::Result;
use std::path::Path;

#[allow(clippy::too_many_arguments)]
pub fn run(
    out: &Path,
    trajectories: Option<usize>,
    seed: u64,
    profile: Profile,
    config: Option<&Path>,
    boundary_particles: bool,
    tall: bool,
    force: bool,
) -> Result<()> {
    let mut resolved = resolve(profile, config)?;
    if tall {
        resolved.scene = resolved.scene.tall();
    }
    prepare_out_dir(out, force)?;
    let opts = resolved.gen_options(seed, boundary_particles, trajectories);
    let manifest = generate_dataset(out, &opts)?;
    println!(
        "wrote {} trajectories ({} frames each, domain {}x{}) to {}",
        manifest.files.len(),
        resolved.scene.steps,
        manifest.domain.0,
        manifest.domain.1,
        out.display()
    );
    Ok(())
}
