//! Boundary-particle augmentation: static obstacle particles along the four
//! domain walls, used by the variant that drops wall-distance features.

use super::trajectory::Trajectory;
use crate::{ParticleType, Vec2};

/// Append one layer of static wall particles at the given spacing (grid
/// units). Points sit at half-offsets along each wall, so corners are never
/// duplicated and a 32x32 domain at spacing 1 gets exactly 128 particles.
/// Fluid frames are unchanged; new particles are constant across frames.
pub fn add_boundary_particles(traj: &Trajectory, spacing: f64) -> Trajectory {
    assert!(spacing > 0.0, "spacing must be positive");
    let (w, h) = (traj.domain.0 as f64, traj.domain.1 as f64);
    let scaling = traj.scaling();
    let mut wall_points: Vec<Vec2> = Vec::new();
    let count_x = (w / spacing).floor() as usize;
    let count_y = (h / spacing).floor() as usize;
    for k in 0..count_x {
        let t = (k as f64 + 0.5) * spacing;
        wall_points.push([t, 0.0]); // bottom
    }
    for k in 0..count_x {
        let t = (k as f64 + 0.5) * spacing;
        wall_points.push([t, h]); // top
    }
    for k in 0..count_y {
        let t = (k as f64 + 0.5) * spacing;
        wall_points.push([0.0, t]); // left
    }
    for k in 0..count_y {
        let t = (k as f64 + 0.5) * spacing;
        wall_points.push([w, t]); // right
    }
    let scaled: Vec<Vec2> = wall_points
        .iter()
        .map(|&p| {
            let s = scaling.scale_point(p);
            [s[0] as f32 as f64, s[1] as f32 as f64]
        })
        .collect();

    let mut out = traj.clone();
    for frame in out.frames.iter_mut() {
        frame.extend_from_slice(&scaled);
    }
    out.types
        .extend(std::iter::repeat(ParticleType::Obstacle).take(scaled.len()));
    out
}
