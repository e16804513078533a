//! Time evolution of the neighbor-count distribution at a given connectivity
//! radius, aggregated over a trajectory sample.

use crate::data::Trajectory;
use crate::graph::build_graph;
use crate::{Result, Vec2};

#[derive(Debug, Clone)]
pub struct NeighborAnalysis {
    pub radius: f64,
    /// Mean neighbor count per frame, averaged over fluid particles and
    /// trajectories.
    pub mean_per_frame: Vec<f64>,
    /// Per frame, histogram over neighbor counts (index = count).
    pub histogram_per_frame: Vec<Vec<u64>>,
}

pub fn neighbor_stats(trajectories: &[Trajectory], radius: f64) -> Result<NeighborAnalysis> {
    assert!(radius > 0.0);
    let frames = trajectories.iter().map(|t| t.len()).min().unwrap_or(0);
    let mut mean_per_frame = vec![0.0; frames];
    let mut histogram_per_frame: Vec<Vec<u64>> = vec![Vec::new(); frames];
    let mut particle_totals = vec![0u64; frames];
    for traj in trajectories {
        let fluid = traj.fluid_indices();
        for k in 0..frames {
            let positions: Vec<Vec2> = fluid.iter().map(|&i| traj.frames[k][i]).collect();
            let edges = build_graph(&positions, radius);
            let mut degree = vec![0u64; positions.len()];
            for (s, _) in edges {
                degree[s as usize] += 1;
            }
            for &d in &degree {
                let hist = &mut histogram_per_frame[k];
                if hist.len() <= d as usize {
                    hist.resize(d as usize + 1, 0);
                }
                hist[d as usize] += 1;
                mean_per_frame[k] += d as f64;
            }
            particle_totals[k] += positions.len() as u64;
        }
    }
    for (m, &n) in mean_per_frame.iter_mut().zip(&particle_totals) {
        if n > 0 {
            *m /= n as f64;
        }
    }
    Ok(NeighborAnalysis {
        radius,
        mean_per_frame,
        histogram_per_frame,
    })
}

impl NeighborAnalysis {
    /// Relative drift of the mean-neighbor curve between two frames.
    pub fn drift(&self, from: usize, to: usize) -> f64 {
        let a = self.mean_per_frame[from.min(self.mean_per_frame.len() - 1)];
        let b = self.mean_per_frame[to.min(self.mean_per_frame.len() - 1)];
        if a == 0.0 {
            return 0.0;
        }
        (b - a).abs() / a
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "frame,mean_neighbors")?;
        for (k, m) in self.mean_per_frame.iter().enumerate() {
            writeln!(w, "{k},{m:.6}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flip::SceneSpec;
    use crate::ParticleType;

    fn still_traj(positions: Vec<Vec2>, frames: usize) -> Trajectory {
        Trajectory {
            frames: (0..frames).map(|_| positions.clone()).collect(),
            types: vec![ParticleType::Fluid; positions.len()],
            dt: 0.05,
            domain: (32, 32),
            scene_meta: SceneSpec::desk(),
        }
    }

    #[test]
    fn isolated_particle_has_zero_neighbors() {
        let traj = still_traj(vec![[0.5, 0.5]], 8);
        let analysis = neighbor_stats(&[traj], 0.03).unwrap();
        assert!(analysis.mean_per_frame.iter().all(|&m| m == 0.0));
        assert_eq!(analysis.histogram_per_frame[0][0], 1);
    }

    #[test]
    fn close_pair_counts_one_neighbor_each() {
        let traj = still_traj(vec![[0.5, 0.5], [0.51, 0.5]], 8);
        let analysis = neighbor_stats(&[traj], 0.03).unwrap();
        assert!(analysis.mean_per_frame.iter().all(|&m| m == 1.0));
        assert_eq!(analysis.histogram_per_frame[0][1], 2);
    }
}
