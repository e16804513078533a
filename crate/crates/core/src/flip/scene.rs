//! Randomized scene generation: optional bottom pool, one or more liquid
//! blocks, rotated elongated obstacles, optional per-block initial velocity.
//!
//! A draw whose particle total exceeds the cap is rejected and re-sampled
//! with the next sub-seed. Obstacle cells are rasterized to Solid and exposed
//! obstacle faces carry static obstacle particles so the learned model can
//! see them.

use super::grid::{CellFlag, MacGrid};
use super::{ParticleState, SceneSpec, SimConfig};
use crate::rng::{rng_for, stream};
use crate::{Error, ParticleType, Result, Vec2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Scene {
    pub state: ParticleState,
    pub grid: MacGrid,
    pub description: SceneDescription,
}

/// What a single draw produced, before any rejection.
#[derive(Debug, Clone, Default)]
pub struct SceneDescription {
    pub pool_height: usize,
    pub blocks: Vec<Block>,
    pub obstacle_count: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Block {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
    pub velocity: Vec2,
}

const MAX_REJECTIONS: u64 = 64;

pub fn generate_scene(seed: u64, spec: &SceneSpec, cfg: &SimConfig) -> Result<Scene> {
    spec.validate()?;
    cfg.validate()?;
    let ppc = cfg.particles_per_cell;
    let min_fluid = (spec.block_size.0 as usize).pow(2) * ppc;
    if min_fluid > spec.max_particles {
        return Err(Error::UnsatisfiableSpec(format!(
            "a single minimum-size block already needs {min_fluid} particles \
             (cap {})",
            spec.max_particles
        )));
    }
    for attempt in 0..MAX_REJECTIONS {
        let mut rng = rng_for(seed, stream::SCENE, attempt);
        let scene = draw_scene(&mut rng, spec, cfg)?;
        let total = scene.state.len();
        let fluid = scene.state.fluid_indices().len();
        if fluid > 0 && total <= spec.max_particles {
            return Ok(scene);
        }
    }
    Err(Error::UnsatisfiableSpec(format!(
        "no draw within the {}-particle cap after {MAX_REJECTIONS} attempts",
        spec.max_particles
    )))
}

fn draw_scene(rng: &mut ChaCha8Rng, spec: &SceneSpec, cfg: &SimConfig) -> Result<Scene> {
    let (nx, ny) = spec.domain;
    let mut grid = MacGrid::new(nx, ny);

    // 1. pool
    let pool_height = if rng.random::<f64>() < spec.pool_probability {
        rng.random_range(spec.pool_height.0..=spec.pool_height.1) as usize
    } else {
        0
    };
    let pool_height = pool_height.min(ny);

    // 2. liquid blocks (one unless the multi-block draw fires)
    let n_blocks = if rng.random::<f64>() < spec.multi_block_probability {
        rng.random_range(spec.block_count.0..=spec.block_count.1) as usize
    } else {
        1
    };
    let mut blocks = Vec::new();
    for _ in 0..n_blocks {
        let w = (rng.random_range(spec.block_size.0..=spec.block_size.1) as usize).min(nx);
        let h = (rng.random_range(spec.block_size.0..=spec.block_size.1) as usize)
            .min(ny.saturating_sub(pool_height));
        if h == 0 {
            continue;
        }
        let x0 = rng.random_range(0..=(nx - w));
        let y0 = rng.random_range(pool_height..=(ny - h));
        let velocity = if rng.random::<f64>() < spec.initial_velocity_probability {
            [
                rng.random_range(spec.initial_velocity.0..=spec.initial_velocity.1),
                rng.random_range(spec.initial_velocity.0..=spec.initial_velocity.1),
            ]
        } else {
            [0.0, 0.0]
        };
        blocks.push(Block {
            x0,
            y0,
            w,
            h,
            velocity,
        });
    }

    // 3. obstacles rasterized by cell-center inclusion
    let mut obstacle_count = 0;
    if rng.random::<f64>() < spec.obstacle_probability {
        obstacle_count = rng.random_range(spec.obstacle_count.0..=spec.obstacle_count.1) as usize;
        for _ in 0..obstacle_count {
            let length = rng.random_range(spec.obstacle_length.0..=spec.obstacle_length.1);
            let angle = rng
                .random_range(spec.obstacle_rotation.0..=spec.obstacle_rotation.1)
                .to_radians();
            let cx = rng.random_range(0.0..nx as f64);
            let cy = rng.random_range(0.0..ny as f64);
            rasterize_obstacle(&mut grid, [cx, cy], length, angle);
        }
    }

    // 4. fluid cells = (pool + blocks) minus solids
    let mut fluid_cell = vec![false; nx * ny];
    for j in 0..pool_height {
        for i in 0..nx {
            fluid_cell[j * nx + i] = true;
        }
    }
    let mut cell_velocity = vec![[0.0f64, 0.0]; nx * ny];
    for b in &blocks {
        for j in b.y0..(b.y0 + b.h).min(ny) {
            for i in b.x0..(b.x0 + b.w).min(nx) {
                fluid_cell[j * nx + i] = true;
                cell_velocity[j * nx + i] = b.velocity;
            }
        }
    }
    for (idx, f) in fluid_cell.iter_mut().enumerate() {
        if grid.cell_flags[idx] == CellFlag::Solid {
            *f = false;
        }
    }

    // 5. seed k x k fluid particles per fluid cell with seeded jitter
    let k = (cfg.particles_per_cell as f64).sqrt() as usize;
    let sub = 1.0 / k as f64;
    let mut state = ParticleState::default();
    for j in 0..ny {
        for i in 0..nx {
            let idx = j * nx + i;
            if !fluid_cell[idx] {
                continue;
            }
            for b in 0..k {
                for a in 0..k {
                    let jx = rng.random_range(-1.0..1.0) * cfg.seed_jitter * sub;
                    let jy = rng.random_range(-1.0..1.0) * cfg.seed_jitter * sub;
                    let x = i as f64 + (a as f64 + 0.5) * sub + jx;
                    let y = j as f64 + (b as f64 + 0.5) * sub + jy;
                    state.positions.push([
                        x.clamp(1e-4, nx as f64 - 1e-4),
                        y.clamp(1e-4, ny as f64 - 1e-4),
                    ]);
                    state.velocities.push(cell_velocity[idx]);
                    state.types.push(ParticleType::Fluid);
                }
            }
        }
    }

    // 6. static obstacle particles on exposed solid faces
    for [x, y] in obstacle_surface_points(&grid) {
        state.positions.push([x, y]);
        state.velocities.push([0.0, 0.0]);
        state.types.push(ParticleType::Obstacle);
    }

    grid.update_fluid_flags(&state.positions, &fluid_mask(&state));
    Ok(Scene {
        state,
        grid,
        description: SceneDescription {
            pool_height,
            blocks,
            obstacle_count,
        },
    })
}

pub(crate) fn fluid_mask(state: &ParticleState) -> Vec<bool> {
    state.types.iter().map(|t| *t == ParticleType::Fluid).collect()
}

fn rasterize_obstacle(grid: &mut MacGrid, center: Vec2, length: f64, angle: f64) {
    let dir = [angle.cos(), angle.sin()];
    let half = length / 2.0;
    let a = [center[0] - dir[0] * half, center[1] - dir[1] * half];
    let b = [center[0] + dir[0] * half, center[1] + dir[1] * half];
    let half_width = 0.5;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let c = [i as f64 + 0.5, j as f64 + 0.5];
            if point_segment_distance(c, a, b) <= half_width {
                let idx = grid.cell_idx(i, j);
                grid.cell_flags[idx] = CellFlag::Solid;
            }
        }
    }
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let d = [ap[0] - t * ab[0], ap[1] - t * ab[1]];
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

/// Midpoints of solid-cell faces that are exposed to a non-solid in-domain
/// cell, in cell-scan order.
fn obstacle_surface_points(grid: &MacGrid) -> Vec<Vec2> {
    let mut out = Vec::new();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.flag(i, j) != CellFlag::Solid {
                continue;
            }
            let (fi, fj) = (i as f64, j as f64);
            let exposed = |di: i64, dj: i64| {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                ni >= 0
                    && nj >= 0
                    && ni < grid.nx as i64
                    && nj < grid.ny as i64
                    && grid.flag(ni as usize, nj as usize) != CellFlag::Solid
            };
            if exposed(-1, 0) {
                out.push([fi, fj + 0.5]);
            }
            if exposed(1, 0) {
                out.push([fi + 1.0, fj + 0.5]);
            }
            if exposed(0, -1) {
                out.push([fi + 0.5, fj]);
            }
            if exposed(0, 1) {
                out.push([fi + 0.5, fj + 1.0]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_feature_spec() -> SceneSpec {
        SceneSpec {
            pool_probability: 0.0,
            multi_block_probability: 0.0,
            obstacle_probability: 0.0,
            initial_velocity_probability: 0.0,
            block_size: (2, 2),
            ..SceneSpec::standard()
        }
    }

    #[test]
    fn degenerate_single_block_has_exact_count() {
        // all probabilities zero, one 2x2 block, 4 particles/cell -> 16
        let scene = generate_scene(5, &no_feature_spec(), &SimConfig::default()).unwrap();
        assert_eq!(scene.state.len(), 16);
        assert!(scene
            .state
            .types
            .iter()
            .all(|t| *t == ParticleType::Fluid));
        assert!(scene
            .grid
            .cell_flags
            .iter()
            .all(|f| *f != CellFlag::Solid));
    }

    #[test]
    fn forced_pool_fills_bottom_rows() {
        // pool probability 1 with height forced to 3, block count forced to 0
        let spec = SceneSpec {
            pool_probability: 1.0,
            pool_height: (3, 3),
            multi_block_probability: 1.0,
            block_count: (0, 0),
            obstacle_probability: 0.0,
            initial_velocity_probability: 0.0,
            ..SceneSpec::standard()
        };
        let scene = generate_scene(17, &spec, &SimConfig::default()).unwrap();
        assert_eq!(scene.state.len(), 32 * 3 * 4);
        assert!(scene.state.positions.iter().all(|p| p[1] < 3.0));
    }

    #[test]
    fn draw_frequencies_match_spec() {
        // Monte-Carlo check of the raw sampler against its own distribution;
        // raw draws, since the rejection loop biases accepted frequencies
        let spec = SceneSpec::standard();
        let cfg = SimConfig::default();
        let trials = 10_000u64;
        let mut pools = 0usize;
        let mut obstacles = 0usize;
        for t in 0..trials {
            let mut rng = crate::rng::rng_for(1_000_000 + t, crate::rng::stream::SCENE, 0);
            let scene = draw_scene(&mut rng, &spec, &cfg).unwrap();
            if scene.description.pool_height > 0 {
                pools += 1;
            }
            if scene.description.obstacle_count > 0 {
                obstacles += 1;
            }
        }
        let pool_rate = pools as f64 / trials as f64;
        let obstacle_rate = obstacles as f64 / trials as f64;
        assert!(
            (pool_rate - 0.3).abs() < 0.02,
            "pool rate {pool_rate} vs 0.3"
        );
        assert!(
            (obstacle_rate - 0.8).abs() < 0.02,
            "obstacle rate {obstacle_rate} vs 0.8"
        );
    }

    #[test]
    fn unsatisfiable_spec_is_rejected() {
        let spec = SceneSpec {
            max_particles: 8,
            block_size: (4, 4),
            ..no_feature_spec()
        };
        let err = generate_scene(0, &spec, &SimConfig::default()).unwrap_err();
        assert!(matches!(err, Error::UnsatisfiableSpec(_)), "{err}");
    }

    #[test]
    fn particle_cap_is_respected() {
        let spec = SceneSpec::standard();
        let cfg = SimConfig::default();
        for seed in 0..50 {
            let scene = generate_scene(seed, &spec, &cfg).unwrap();
            assert!(scene.state.len() <= spec.max_particles);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SceneSpec::standard();
        let cfg = SimConfig::default();
        let a = generate_scene(33, &spec, &cfg).unwrap();
        let b = generate_scene(33, &spec, &cfg).unwrap();
        assert_eq!(a.state.positions, b.state.positions);
        assert_eq!(a.state.velocities, b.state.velocities);
    }
}
