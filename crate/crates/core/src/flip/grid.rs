//! Staggered MAC grid with bilinear particle/grid transfers.
//!
//! u velocities sit on vertical faces at (i, j+0.5) for i in 0..=nx,
//! v velocities on horizontal faces at (i+0.5, j) for j in 0..=ny,
//! cell centers at (i+0.5, j+0.5). Cell size is 1 grid unit.

use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellFlag {
    Fluid,
    Empty,
    Solid,
}

#[derive(Debug, Clone)]
pub struct MacGrid {
    pub nx: usize,
    pub ny: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub cell_flags: Vec<CellFlag>,
    /// Faces that received particle mass in the last transfer.
    pub u_valid: Vec<bool>,
    pub v_valid: Vec<bool>,
}

impl MacGrid {
    pub fn new(nx: usize, ny: usize) -> Self {
        MacGrid {
            nx,
            ny,
            u: vec![0.0; (nx + 1) * ny],
            v: vec![0.0; nx * (ny + 1)],
            cell_flags: vec![CellFlag::Empty; nx * ny],
            u_valid: vec![false; (nx + 1) * ny],
            v_valid: vec![false; nx * (ny + 1)],
        }
    }

    #[inline]
    pub fn cell_idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn u_idx(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn v_idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn flag(&self, i: usize, j: usize) -> CellFlag {
        self.cell_flags[self.cell_idx(i, j)]
    }

    pub fn is_solid(&self, i: i64, j: i64) -> bool {
        // Outside the domain counts as solid wall.
        if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
            return true;
        }
        self.flag(i as usize, j as usize) == CellFlag::Solid
    }

    pub fn solid_at_point(&self, p: Vec2) -> bool {
        self.is_solid(p[0].floor() as i64, p[1].floor() as i64)
    }

    /// Mark non-solid cells containing at least one fluid particle as Fluid.
    pub fn update_fluid_flags(&mut self, positions: &[Vec2], fluid_mask: &[bool]) {
        for f in self.cell_flags.iter_mut() {
            if *f == CellFlag::Fluid {
                *f = CellFlag::Empty;
            }
        }
        for (p, &is_fluid) in positions.iter().zip(fluid_mask) {
            if !is_fluid {
                continue;
            }
            let i = (p[0].floor() as i64).clamp(0, self.nx as i64 - 1) as usize;
            let j = (p[1].floor() as i64).clamp(0, self.ny as i64 - 1) as usize;
            let idx = self.cell_idx(i, j);
            if self.cell_flags[idx] != CellFlag::Solid {
                self.cell_flags[idx] = CellFlag::Fluid;
            }
        }
    }

    /// Bilinear particle-to-grid velocity transfer. Faces with no particle
    /// mass are zeroed and marked invalid.
    pub fn transfer_from_particles(&mut self, positions: &[Vec2], velocities: &[Vec2], fluid_mask: &[bool]) {
        let mut u_w = vec![0.0; self.u.len()];
        let mut v_w = vec![0.0; self.v.len()];
        self.u.iter_mut().for_each(|x| *x = 0.0);
        self.v.iter_mut().for_each(|x| *x = 0.0);

        let nx = self.nx;
        let ny = self.ny;
        for ((p, vel), &is_fluid) in positions.iter().zip(velocities).zip(fluid_mask) {
            if !is_fluid {
                continue;
            }
            // u component: index space (x, y - 0.5)
            splat(&mut self.u, &mut u_w, nx + 1, ny, p[0], p[1] - 0.5, vel[0]);
            // v component: index space (x - 0.5, y)
            splat(&mut self.v, &mut v_w, nx, ny + 1, p[0] - 0.5, p[1], vel[1]);
        }
        for (i, w) in u_w.iter().enumerate() {
            if *w > 0.0 {
                self.u[i] /= w;
                self.u_valid[i] = true;
            } else {
                self.u[i] = 0.0;
                self.u_valid[i] = false;
            }
        }
        for (i, w) in v_w.iter().enumerate() {
            if *w > 0.0 {
                self.v[i] /= w;
                self.v_valid[i] = true;
            } else {
                self.v[i] = 0.0;
                self.v_valid[i] = false;
            }
        }
    }

    pub fn apply_gravity(&mut self, gravity: Vec2, dt: f64) {
        if gravity[0] != 0.0 {
            for u in self.u.iter_mut() {
                *u += gravity[0] * dt;
            }
        }
        if gravity[1] != 0.0 {
            for v in self.v.iter_mut() {
                *v += gravity[1] * dt;
            }
        }
    }

    /// Zero the normal velocity on every face touching a solid cell or the
    /// domain boundary.
    pub fn enforce_solid_boundaries(&mut self) {
        let (nx, ny) = (self.nx, self.ny);
        for j in 0..ny {
            for i in 0..=nx {
                if self.is_solid(i as i64 - 1, j as i64) || self.is_solid(i as i64, j as i64) {
                    let idx = self.u_idx(i, j);
                    self.u[idx] = 0.0;
                }
            }
        }
        for j in 0..=ny {
            for i in 0..nx {
                if self.is_solid(i as i64, j as i64 - 1) || self.is_solid(i as i64, j as i64) {
                    let idx = self.v_idx(i, j);
                    self.v[idx] = 0.0;
                }
            }
        }
    }

    /// Copy velocities into invalid faces from valid neighbors so advection
    /// can sample just outside the fluid. A few Jacobi-style sweeps suffice.
    pub fn extrapolate_velocities(&mut self, sweeps: usize) {
        for _ in 0..sweeps {
            extrapolate_component(&mut self.u, &mut self.u_valid, self.nx + 1, self.ny);
            extrapolate_component(&mut self.v, &mut self.v_valid, self.nx, self.ny + 1);
        }
    }

    /// Bilinear velocity sample at an arbitrary point.
    pub fn sample_velocity(&self, p: Vec2) -> Vec2 {
        self.sample_velocity_from(&self.u, &self.v, p)
    }

    /// Same sampling against external u/v buffers (e.g. the stored
    /// pre-projection grid for the FLIP delta).
    pub fn sample_velocity_from(&self, u: &[f64], v: &[f64], p: Vec2) -> Vec2 {
        let us = interp(u, self.nx + 1, self.ny, p[0], p[1] - 0.5);
        let vs = interp(v, self.nx, self.ny + 1, p[0] - 0.5, p[1]);
        [us, vs]
    }

    /// Divergence of a fluid cell (cell size 1).
    pub fn divergence(&self, i: usize, j: usize) -> f64 {
        self.u[self.u_idx(i + 1, j)] - self.u[self.u_idx(i, j)] + self.v[self.v_idx(i, j + 1)]
            - self.v[self.v_idx(i, j)]
    }

    pub fn max_fluid_divergence(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                if self.flag(i, j) == CellFlag::Fluid {
                    worst = worst.max(self.divergence(i, j).abs());
                }
            }
        }
        worst
    }
}

fn splat(field: &mut [f64], weights: &mut [f64], cols: usize, rows: usize, fx: f64, fy: f64, value: f64) {
    let fx = fx.clamp(0.0, (cols - 1) as f64);
    let fy = fy.clamp(0.0, (rows - 1) as f64);
    let i0 = (fx.floor() as usize).min(cols.saturating_sub(2));
    let j0 = (fy.floor() as usize).min(rows.saturating_sub(2));
    let tx = fx - i0 as f64;
    let ty = fy - j0 as f64;
    let i1 = (i0 + 1).min(cols - 1);
    let j1 = (j0 + 1).min(rows - 1);
    let w = [
        (1.0 - tx) * (1.0 - ty),
        tx * (1.0 - ty),
        (1.0 - tx) * ty,
        tx * ty,
    ];
    let idx = [j0 * cols + i0, j0 * cols + i1, j1 * cols + i0, j1 * cols + i1];
    for (k, &id) in idx.iter().enumerate() {
        field[id] += w[k] * value;
        weights[id] += w[k];
    }
}

fn interp(field: &[f64], cols: usize, rows: usize, fx: f64, fy: f64) -> f64 {
    let fx = fx.clamp(0.0, (cols - 1) as f64);
    let fy = fy.clamp(0.0, (rows - 1) as f64);
    let i0 = (fx.floor() as usize).min(cols.saturating_sub(2));
    let j0 = (fy.floor() as usize).min(rows.saturating_sub(2));
    let tx = fx - i0 as f64;
    let ty = fy - j0 as f64;
    let i1 = (i0 + 1).min(cols - 1);
    let j1 = (j0 + 1).min(rows - 1);
    field[j0 * cols + i0] * (1.0 - tx) * (1.0 - ty)
        + field[j0 * cols + i1] * tx * (1.0 - ty)
        + field[j1 * cols + i0] * (1.0 - tx) * ty
        + field[j1 * cols + i1] * tx * ty
}

fn extrapolate_component(field: &mut [f64], valid: &mut [bool], cols: usize, rows: usize) {
    let old_valid = valid.to_vec();
    let old_field = field.to_vec();
    for j in 0..rows {
        for i in 0..cols {
            let idx = j * cols + i;
            if old_valid[idx] {
                continue;
            }
            let mut sum = 0.0;
            let mut count = 0;
            if i > 0 && old_valid[idx - 1] {
                sum += old_field[idx - 1];
                count += 1;
            }
            if i + 1 < cols && old_valid[idx + 1] {
                sum += old_field[idx + 1];
                count += 1;
            }
            if j > 0 && old_valid[idx - cols] {
                sum += old_field[idx - cols];
                count += 1;
            }
            if j + 1 < rows && old_valid[idx + cols] {
                sum += old_field[idx + cols];
                count += 1;
            }
            if count > 0 {
                field[idx] = sum / count as f64;
                valid[idx] = true;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_particle_transfer_roundtrip() {
        // one particle: every touched face carries exactly its velocity, so
        // sampling back at the particle reproduces it
        let mut grid = MacGrid::new(8, 8);
        let pos = [[3.3, 4.7]];
        let vel = [[1.5, -2.5]];
        grid.transfer_from_particles(&pos, &vel, &[true]);
        let back = grid.sample_velocity(pos[0]);
        assert!((back[0] - 1.5).abs() < 1e-12);
        assert!((back[1] + 2.5).abs() < 1e-12);
    }

    #[test]
    fn solid_faces_carry_zero_normal_velocity() {
        let mut grid = MacGrid::new(4, 4);
        let solid = grid.cell_idx(2, 2);
        grid.cell_flags[solid] = CellFlag::Solid;
        grid.u.iter_mut().for_each(|x| *x = 1.0);
        grid.v.iter_mut().for_each(|x| *x = 1.0);
        grid.enforce_solid_boundaries();
        // domain boundary faces
        for j in 0..4 {
            assert_eq!(grid.u[grid.u_idx(0, j)], 0.0);
            assert_eq!(grid.u[grid.u_idx(4, j)], 0.0);
        }
        // faces of the solid cell
        assert_eq!(grid.u[grid.u_idx(2, 2)], 0.0);
        assert_eq!(grid.u[grid.u_idx(3, 2)], 0.0);
        assert_eq!(grid.v[grid.v_idx(2, 2)], 0.0);
        assert_eq!(grid.v[grid.v_idx(2, 3)], 0.0);
        // an interior face away from solids is untouched
        assert_eq!(grid.u[grid.u_idx(1, 0)], 1.0);
    }

    #[test]
    fn extrapolation_fills_adjacent_faces() {
        let mut grid = MacGrid::new(4, 4);
        let seeded = grid.u_idx(2, 2);
        grid.u_valid[seeded] = true;
        grid.u[seeded] = 3.0;
        grid.extrapolate_velocities(1);
        assert_eq!(grid.u[grid.u_idx(1, 2)], 3.0);
        assert_eq!(grid.u[grid.u_idx(3, 2)], 3.0);
        assert!(grid.u_valid[grid.u_idx(1, 2)]);
    }
}
