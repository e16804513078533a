//! Variable-domain pressure projection.
//!
//! Solves the 5-point Poisson system over fluid cells (Neumann at solid
//! cells and domain walls, Dirichlet p = 0 at empty cells) with
//! Jacobi-preconditioned conjugate gradient, then subtracts the pressure
//! gradient. The CG residual equals the post-correction divergence, so the
//! convergence test is exactly the contract being enforced.

use super::grid::{CellFlag, MacGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct PressureStats {
    pub iterations: usize,
    pub residual: f64,
    pub fluid_cells: usize,
}

struct System {
    /// Fluid cell indices in grid order.
    cells: Vec<usize>,
    /// Map from grid cell index to system row, -1 if not fluid.
    row_of: Vec<i32>,
    /// Diagonal (number of non-solid neighbors).
    diag: Vec<f64>,
    /// Fluid neighbors per row (system row indices).
    neighbors: Vec<Vec<u32>>,
}

fn build_system(grid: &MacGrid) -> System {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut cells = Vec::new();
    let mut row_of = vec![-1i32; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            if grid.flag(i, j) == CellFlag::Fluid {
                row_of[grid.cell_idx(i, j)] = cells.len() as i32;
                cells.push(grid.cell_idx(i, j));
            }
        }
    }
    let mut diag = vec![0.0; cells.len()];
    let mut neighbors = vec![Vec::new(); cells.len()];
    for (row, &cell) in cells.iter().enumerate() {
        let i = (cell % nx) as i64;
        let j = (cell / nx) as i64;
        for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
            let (ni, nj) = (i + di, j + dj);
            if grid.is_solid(ni, nj) {
                continue; // Neumann: no equation coupling, no diagonal term
            }
            diag[row] += 1.0;
            let ncell = nj as usize * nx + ni as usize;
            let nrow = row_of[ncell];
            if nrow >= 0 {
                neighbors[row].push(nrow as u32);
            }
            // Empty neighbor: Dirichlet p=0 contributes only to the diagonal.
        }
    }
    System {
        cells,
        row_of,
        diag,
        neighbors,
    }
}

fn apply(sys: &System, x: &[f64], out: &mut [f64]) {
    for row in 0..x.len() {
        let mut acc = sys.diag[row] * x[row];
        for &n in &sys.neighbors[row] {
            acc -= x[n as usize];
        }
        out[row] = acc;
    }
}

/// Zero the mean divergence of sealed fluid components (no empty-cell
/// contact); a pure-Neumann region only admits a solution for a compatible
/// right-hand side.
fn project_sealed_components(grid: &MacGrid, sys: &System, b: &mut [f64]) {
    let n = sys.cells.len();
    let mut component = vec![-1i32; n];
    let mut next = 0i32;
    let nx = grid.nx;
    for start in 0..n {
        if component[start] >= 0 {
            continue;
        }
        let mut stack = vec![start];
        let mut members = Vec::new();
        let mut sealed = true;
        component[start] = next;
        while let Some(row) = stack.pop() {
            members.push(row);
            let cell = sys.cells[row];
            let (i, j) = ((cell % nx) as i64, (cell / nx) as i64);
            for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (ni, nj) = (i + di, j + dj);
                if grid.is_solid(ni, nj) {
                    continue;
                }
                let ncell = nj as usize * nx + ni as usize;
                let nrow = sys.row_of[ncell];
                if nrow < 0 {
                    sealed = false; // empty neighbor provides a Dirichlet boundary
                } else if component[nrow as usize] < 0 {
                    component[nrow as usize] = next;
                    stack.push(nrow as usize);
                }
            }
        }
        if sealed && !members.is_empty() {
            let mean: f64 = members.iter().map(|&r| b[r]).sum::<f64>() / members.len() as f64;
            for &r in &members {
                b[r] -= mean;
            }
        }
        next += 1;
    }
}

/// Project the grid velocity field to (discretely) divergence-free.
pub fn pressure_project(
    grid: &mut MacGrid,
    tolerance: f64,
    max_iterations: usize,
) -> Result<PressureStats> {
    let sys = build_system(grid);
    let n = sys.cells.len();
    if n == 0 {
        return Ok(PressureStats {
            iterations: 0,
            residual: 0.0,
            fluid_cells: 0,
        });
    }
    let nx = grid.nx;
    // u_new = u - (p_R - p_L) makes div_new = div + A p, so solve A p = -div;
    // the CG residual then equals the remaining divergence exactly.
    let mut b = vec![0.0; n];
    for (row, &cell) in sys.cells.iter().enumerate() {
        let (i, j) = (cell % nx, cell / nx);
        b[row] = -grid.divergence(i, j);
    }
    project_sealed_components(grid, &sys, &mut b);

    let inv_diag: Vec<f64> = sys
        .diag
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 })
        .collect();

    let inf = |r: &[f64]| r.iter().fold(0.0f64, |m, &x| m.max(x.abs()));

    let mut p = vec![0.0; n];
    let mut r = b.clone();
    let mut residual = inf(&r);
    let mut iterations = 0;
    if residual > tolerance {
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(x, d)| x * d).collect();
        let mut s = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let mut a_s = vec![0.0; n];
        while iterations < max_iterations {
            iterations += 1;
            apply(&sys, &s, &mut a_s);
            let s_as: f64 = s.iter().zip(&a_s).map(|(a, b)| a * b).sum();
            if s_as.abs() < f64::MIN_POSITIVE {
                break;
            }
            let alpha = rz / s_as;
            for i in 0..n {
                p[i] += alpha * s[i];
                r[i] -= alpha * a_s[i];
            }
            residual = inf(&r);
            if residual <= tolerance {
                break;
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                s[i] = z[i] + beta * s[i];
            }
        }
    }
    if residual > tolerance {
        return Err(Error::PressureNoConvergence {
            residual,
            iterations,
            tolerance,
        });
    }

    subtract_gradient(grid, &sys, &p);
    Ok(PressureStats {
        iterations,
        residual,
        fluid_cells: n,
    })
}

fn subtract_gradient(grid: &mut MacGrid, sys: &System, p: &[f64]) {
    let (nx, ny) = (grid.nx, grid.ny);
    let pressure_at = |row_of: &[i32], i: i64, j: i64| -> Option<f64> {
        // None for solid (face stays fixed); 0.0 for empty.
        if i < 0 || j < 0 || i >= nx as i64 || j >= ny as i64 {
            return None;
        }
        let cell = j as usize * nx + i as usize;
        if grid.cell_flags[cell] == CellFlag::Solid {
            return None;
        }
        let row = row_of[cell];
        Some(if row >= 0 { p[row as usize] } else { 0.0 })
    };

    let mut u_updates = Vec::new();
    for j in 0..ny {
        for i in 0..=nx {
            let left = pressure_at(&sys.row_of, i as i64 - 1, j as i64);
            let right = pressure_at(&sys.row_of, i as i64, j as i64);
            if let (Some(pl), Some(pr)) = (left, right) {
                let l_fluid = i > 0 && grid.flag(i - 1, j) == CellFlag::Fluid;
                let r_fluid = i < nx && grid.flag(i, j) == CellFlag::Fluid;
                if l_fluid || r_fluid {
                    u_updates.push((grid.u_idx(i, j), pr - pl));
                }
            }
        }
    }
    let mut v_updates = Vec::new();
    for j in 0..=ny {
        for i in 0..nx {
            let below = pressure_at(&sys.row_of, i as i64, j as i64 - 1);
            let above = pressure_at(&sys.row_of, i as i64, j as i64);
            if let (Some(pb), Some(pa)) = (below, above) {
                let b_fluid = j > 0 && grid.flag(i, j - 1) == CellFlag::Fluid;
                let a_fluid = j < ny && grid.flag(i, j) == CellFlag::Fluid;
                if b_fluid || a_fluid {
                    v_updates.push((grid.v_idx(i, j), pa - pb));
                }
            }
        }
    }
    for (idx, g) in u_updates {
        grid.u[idx] -= g;
    }
    for (idx, g) in v_updates {
        grid.v[idx] -= g;
    }
}
