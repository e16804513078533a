//! Finite-difference velocities and target accelerations from position
//! frames. Velocities are per-step displacements: the physical dt is folded
//! into the learned units and kept only in metadata.

use super::trajectory::Trajectory;
use crate::{Error, Result, Vec2};

/// Per-particle kinematics at frame `t`: the five velocities
/// v[t-4..=t] with v[k] = p[k] - p[k-1], and the target acceleration
/// a[t] = v[t+1] - v[t].
pub struct Kinematics {
    /// `[particle][history]`, oldest first.
    pub velocities: Vec<[Vec2; 5]>,
    pub accelerations: Vec<Vec2>,
}

pub fn finite_difference_kinematics(traj: &Trajectory, t: usize) -> Result<Kinematics> {
    if t < 5 || t + 2 > traj.len() {
        return Err(Error::Contract(format!(
            "frame index {t} outside [5, {}]",
            traj.len().saturating_sub(2)
        )));
    }
    let n = traj.particle_count();
    let mut velocities = Vec::with_capacity(n);
    let mut accelerations = Vec::with_capacity(n);
    for i in 0..n {
        let mut vs = [[0.0; 2]; 5];
        for (h, k) in (t - 4..=t).enumerate() {
            vs[h] = [
                traj.frames[k][i][0] - traj.frames[k - 1][i][0],
                traj.frames[k][i][1] - traj.frames[k - 1][i][1],
            ];
        }
        let v_next = [
            traj.frames[t + 1][i][0] - traj.frames[t][i][0],
            traj.frames[t + 1][i][1] - traj.frames[t][i][1],
        ];
        accelerations.push([v_next[0] - vs[4][0], v_next[1] - vs[4][1]]);
        velocities.push(vs);
    }
    Ok(Kinematics {
        velocities,
        accelerations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flip::SceneSpec;
    use crate::ParticleType;

    fn traj_from_path(path: impl Fn(usize) -> Vec2, frames: usize) -> Trajectory {
        Trajectory {
            frames: (0..frames).map(|k| vec![path(k)]).collect(),
            types: vec![ParticleType::Fluid],
            dt: 0.05,
            domain: (32, 32),
            scene_meta: SceneSpec::desk(),
        }
    }

    #[test]
    fn stationary_particle_has_zero_kinematics() {
        let traj = traj_from_path(|_| [0.4, 0.3], 8);
        let k = finite_difference_kinematics(&traj, 5).unwrap();
        assert_eq!(k.velocities[0], [[0.0, 0.0]; 5]);
        assert_eq!(k.accelerations[0], [0.0, 0.0]);
    }

    #[test]
    fn uniform_motion_has_constant_velocity_zero_acceleration() {
        let d = [0.01, -0.005];
        let traj = traj_from_path(|k| [0.4 + d[0] * k as f64, 0.8 + d[1] * k as f64], 9);
        let k = finite_difference_kinematics(&traj, 6).unwrap();
        for v in k.velocities[0] {
            assert!((v[0] - d[0]).abs() < 1e-12);
            assert!((v[1] - d[1]).abs() < 1e-12);
        }
        assert!(k.accelerations[0][0].abs() < 1e-12);
        assert!(k.accelerations[0][1].abs() < 1e-12);
    }

    #[test]
    fn quadratic_path_recovers_constant_second_difference() {
        let g = -0.002;
        let traj = traj_from_path(|k| [0.5, 1.0 + 0.5 * g * (k as f64) * (k as f64)], 10);
        let k = finite_difference_kinematics(&traj, 6).unwrap();
        // second difference of 0.5*g*k^2 is exactly g
        assert!((k.accelerations[0][1] - g).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_frame_is_rejected() {
        let traj = traj_from_path(|_| [0.5, 0.5], 8);
        assert!(finite_difference_kinematics(&traj, 4).is_err());
        assert!(finite_difference_kinematics(&traj, 7).is_err());
        assert!(finite_difference_kinematics(&traj, 6).is_ok());
    }
}
