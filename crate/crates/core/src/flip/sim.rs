//! One FLIP step and full trajectory simulation.

use super::grid::MacGrid;
use super::pressure::pressure_project;
use super::scene::{fluid_mask, generate_scene};
use super::{ParticleState, SceneSpec, SimConfig};
use crate::data::Trajectory;
use crate::{Error, Result, Vec2};

/// Grid-unit frames straight out of the solver, before dataset scaling.
#[derive(Debug, Clone)]
pub struct RawTrajectory {
    pub frames: Vec<Vec<Vec2>>,
    pub types: Vec<crate::ParticleType>,
    pub spec: SceneSpec,
}

/// Advance particles by one time step:
/// particle-to-grid transfer, store the pre-projection grid, gravity, solid
/// boundaries, pressure projection, FLIP/PIC blended grid-to-particle update,
/// RK2 advection, then push-out of solids and the domain clamp.
pub fn flip_step(
    state: &mut ParticleState,
    grid: &mut MacGrid,
    cfg: &SimConfig,
    dt: f64,
) -> Result<()> {
    let mask = fluid_mask(state);
    grid.update_fluid_flags(&state.positions, &mask);
    grid.transfer_from_particles(&state.positions, &state.velocities, &mask);

    let u_old = grid.u.clone();
    let v_old = grid.v.clone();

    grid.apply_gravity(cfg.gravity, dt);
    grid.enforce_solid_boundaries();
    pressure_project(grid, cfg.pressure_tolerance, cfg.max_pressure_iterations)?;
    grid.enforce_solid_boundaries();
    grid.extrapolate_velocities(2);

    // grid-to-particle: blend FLIP delta with PIC interpolation
    let blend = cfg.flip_blend;
    for idx in 0..state.len() {
        if !mask[idx] {
            continue;
        }
        let p = state.positions[idx];
        let pic = grid.sample_velocity(p);
        let old = grid.sample_velocity_from(&u_old, &v_old, p);
        let delta = [pic[0] - old[0], pic[1] - old[1]];
        let v = state.velocities[idx];
        let flip = [v[0] + delta[0], v[1] + delta[1]];
        state.velocities[idx] = [
            blend * flip[0] + (1.0 - blend) * pic[0],
            blend * flip[1] + (1.0 - blend) * pic[1],
        ];
    }

    // RK2 (midpoint) advection through the projected grid field
    let (nx, ny) = (grid.nx as f64, grid.ny as f64);
    let margin = 1e-4;
    for idx in 0..state.len() {
        if !mask[idx] {
            continue;
        }
        let p = state.positions[idx];
        let k1 = grid.sample_velocity(p);
        let mid = [p[0] + 0.5 * dt * k1[0], p[1] + 0.5 * dt * k1[1]];
        let k2 = grid.sample_velocity([
            mid[0].clamp(0.0, nx),
            mid[1].clamp(0.0, ny),
        ]);
        let mut np = [p[0] + dt * k2[0], p[1] + dt * k2[1]];
        if !np[0].is_finite() || !np[1].is_finite() {
            return Err(Error::SimulationDiverged(format!(
                "particle {idx} at non-finite position"
            )));
        }
        np[0] = np[0].clamp(margin, nx - margin);
        np[1] = np[1].clamp(margin, ny - margin);
        if grid.solid_at_point(np) {
            np = push_out_of_solid(grid, p, np);
        }
        state.positions[idx] = np;
    }
    Ok(())
}

/// Walk back along the motion segment to the last non-solid point; falls back
/// to the previous position, which is outside solids by induction.
fn push_out_of_solid(grid: &MacGrid, from: Vec2, to: Vec2) -> Vec2 {
    let mut lo = 0.0f64; // from-side, non-solid
    let mut hi = 1.0f64; // to-side, solid
    if grid.solid_at_point(from) {
        // previous position already invalid: snap to nearest non-solid cell center
        return nearest_open_cell_center(grid, to);
    }
    for _ in 0..24 {
        let t = 0.5 * (lo + hi);
        let p = [from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])];
        if grid.solid_at_point(p) {
            hi = t;
        } else {
            lo = t;
        }
    }
    let t = lo * 0.98;
    [
        from[0] + t * (to[0] - from[0]),
        from[1] + t * (to[1] - from[1]),
    ]
}

fn nearest_open_cell_center(grid: &MacGrid, p: Vec2) -> Vec2 {
    let ci = (p[0].floor() as i64).clamp(0, grid.nx as i64 - 1);
    let cj = (p[1].floor() as i64).clamp(0, grid.ny as i64 - 1);
    let mut best = None;
    let mut best_d = f64::INFINITY;
    for j in 0..grid.ny as i64 {
        for i in 0..grid.nx as i64 {
            if !grid.is_solid(i, j) {
                let d = ((i - ci).pow(2) + (j - cj).pow(2)) as f64;
                if d < best_d {
                    best_d = d;
                    best = Some([i as f64 + 0.5, j as f64 + 0.5]);
                }
            }
        }
    }
    best.unwrap_or([grid.nx as f64 / 2.0, grid.ny as f64 / 2.0])
}

/// Generate a scene and run it for `spec.steps` frames (frame 0 is the
/// initial state). Deterministic per seed. Frames are in grid units.
pub fn simulate_raw(seed: u64, spec: &SceneSpec, cfg: &SimConfig) -> Result<RawTrajectory> {
    let scene = generate_scene(seed, spec, cfg)?;
    let mut state = scene.state;
    let mut grid = scene.grid;
    let mut frames = Vec::with_capacity(spec.steps);
    frames.push(state.positions.clone());
    for _ in 1..spec.steps {
        flip_step(&mut state, &mut grid, cfg, spec.dt)?;
        frames.push(state.positions.clone());
    }
    Ok(RawTrajectory {
        frames,
        types: state.types,
        spec: spec.clone(),
    })
}

/// Full pipeline to a dataset trajectory: simulate, then scale positions to
/// dataset units.
pub fn simulate_trajectory(seed: u64, spec: &SceneSpec, cfg: &SimConfig) -> Result<Trajectory> {
    let raw = simulate_raw(seed, spec, cfg)?;
    Ok(Trajectory::from_raw(&raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flip::generate_scene;
    use crate::ParticleType;

    fn single_particle_setup() -> (ParticleState, MacGrid) {
        let state = ParticleState {
            positions: vec![[16.0, 16.0]],
            velocities: vec![[0.0, 0.0]],
            types: vec![ParticleType::Fluid],
        };
        (state, MacGrid::new(32, 32))
    }

    #[test]
    fn isolated_particle_free_falls() {
        // empty pressure system: velocity gains exactly gravity * dt
        let (mut state, mut grid) = single_particle_setup();
        let cfg = SimConfig::default();
        flip_step(&mut state, &mut grid, &cfg, 0.05).unwrap();
        let v = state.velocities[0];
        assert!((v[0]).abs() < 1e-12, "vx = {}", v[0]);
        assert!((v[1] + 0.4905).abs() < 1e-12, "vy = {}", v[1]);
        // advected through the uniform post-step field
        let p = state.positions[0];
        assert!((p[0] - 16.0).abs() < 1e-12);
        assert!((p[1] - (16.0 - 0.4905 * 0.05)).abs() < 1e-9, "y = {}", p[1]);
    }

    fn pool_spec(height: u32) -> SceneSpec {
        SceneSpec {
            pool_probability: 1.0,
            pool_height: (height, height),
            multi_block_probability: 1.0,
            block_count: (0, 0),
            obstacle_probability: 0.0,
            initial_velocity_probability: 0.0,
            ..SceneSpec::standard()
        }
    }

    #[test]
    fn hydrostatic_pool_stays_at_rest() {
        let cfg = SimConfig::default();
        let scene = generate_scene(3, &pool_spec(5), &cfg).unwrap();
        let mut state = scene.state;
        let mut grid = scene.grid;
        let initial = state.positions.clone();
        for _ in 0..50 {
            flip_step(&mut state, &mut grid, &cfg, 0.05).unwrap();
        }
        let max_speed = state
            .velocities
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
            .fold(0.0f64, f64::max);
        assert!(max_speed < 1e-3, "max speed {max_speed}");
        let max_disp = state
            .positions
            .iter()
            .zip(&initial)
            .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
            .fold(0.0f64, f64::max);
        assert!(max_disp < 0.1, "max displacement {max_disp}");
    }

    #[test]
    fn particles_stay_out_of_solids_and_in_domain() {
        let spec = SceneSpec {
            obstacle_probability: 1.0,
            ..SceneSpec::desk()
        };
        let cfg = SimConfig::default();
        let raw = simulate_raw(21, &spec, &cfg).unwrap();
        let scene = generate_scene(21, &spec, &cfg).unwrap();
        let (nx, ny) = (spec.domain.0 as f64, spec.domain.1 as f64);
        for frame in &raw.frames {
            for (p, t) in frame.iter().zip(&raw.types) {
                if *t != ParticleType::Fluid {
                    continue;
                }
                assert!(p[0] > 0.0 && p[0] < nx && p[1] > 0.0 && p[1] < ny);
                assert!(
                    !scene.grid.solid_at_point(*p),
                    "fluid particle inside solid at {p:?}"
                );
            }
        }
    }

    #[test]
    fn trajectory_is_deterministic_and_conserves_particles() {
        let spec = SceneSpec {
            steps: 40,
            ..SceneSpec::desk()
        };
        let cfg = SimConfig::default();
        let a = simulate_raw(9, &spec, &cfg).unwrap();
        let b = simulate_raw(9, &spec, &cfg).unwrap();
        assert_eq!(a.frames, b.frames, "same seed must be bit-identical");
        let count = a.frames[0].len();
        assert!(a.frames.iter().all(|f| f.len() == count));
        assert_eq!(a.frames.len(), 40);
    }

    #[test]
    fn divergence_stays_below_tolerance_during_run() {
        let spec = SceneSpec {
            steps: 30,
            ..SceneSpec::desk()
        };
        let cfg = SimConfig::default();
        let scene = generate_scene(14, &spec, &cfg).unwrap();
        let mut state = scene.state;
        let mut grid = scene.grid;
        for _ in 0..30 {
            flip_step(&mut state, &mut grid, &cfg, spec.dt).unwrap();
            // the grid still holds the projected field of this step
            assert!(grid.max_fluid_divergence() <= cfg.pressure_tolerance * 1.001);
        }
    }
}
