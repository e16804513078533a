//! Exact earth mover's distance between equal-count particle sets with
//! uniform weights.
//!
//! With uniform balanced weights the optimal transport polytope has a
//! permutation-matrix vertex at the optimum, so the problem reduces to a
//! linear assignment solved exactly by the Hungarian method with potentials
//! in O(n^3).

use crate::{Error, Result, Vec2};

/// Row-major cost matrix plus the probabilistic weights of both sides.
#[derive(Debug, Clone)]
pub struct TransportProblem {
    pub source_weights: Vec<f64>,
    pub target_weights: Vec<f64>,
    /// n x m, row-major.
    pub cost: Vec<f64>,
}

/// Optimal plan for the uniform equal-count case: a permutation scaled by
/// 1/n. `P[i][assignment[i]] = mass`, zero elsewhere.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    pub assignment: Vec<usize>,
    pub mass: f64,
    /// sum_ij P_ij M_ij at the optimum.
    pub value: f64,
}

impl TransportProblem {
    /// Uniform weights and Euclidean pairwise distances.
    pub fn uniform_euclidean(source: &[Vec2], target: &[Vec2]) -> Result<Self> {
        if source.is_empty() || target.is_empty() {
            return Err(Error::Contract("empty point set".into()));
        }
        let n = source.len();
        let m = target.len();
        let mut cost = vec![0.0; n * m];
        for (i, a) in source.iter().enumerate() {
            for (j, b) in target.iter().enumerate() {
                let dx = a[0] - b[0];
                let dy = a[1] - b[1];
                cost[i * m + j] = (dx * dx + dy * dy).sqrt();
            }
        }
        Ok(TransportProblem {
            source_weights: vec![1.0 / n as f64; n],
            target_weights: vec![1.0 / m as f64; m],
            cost,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.source_weights.len(), self.target_weights.len())
    }

    /// Exact solve. Restricted to the balanced uniform case guaranteed by the
    /// rollout contract (equal particle counts, weights 1/n).
    pub fn solve(&self) -> Result<TransportPlan> {
        let (n, m) = self.dims();
        if n != m {
            return Err(Error::Contract(format!(
                "transport solve requires equal particle counts, got {n} vs {m}"
            )));
        }
        let uniform = 1.0 / n as f64;
        let is_uniform = |w: &[f64]| w.iter().all(|&x| (x - uniform).abs() < 1e-12);
        if !is_uniform(&self.source_weights) || !is_uniform(&self.target_weights) {
            return Err(Error::Contract(
                "transport solve requires uniform weights".into(),
            ));
        }
        let (assignment, total) = solve_assignment(&self.cost, n);
        Ok(TransportPlan {
            assignment,
            mass: uniform,
            value: total * uniform,
        })
    }
}

impl TransportPlan {
    pub fn row_marginals(&self) -> Vec<f64> {
        vec![self.mass; self.assignment.len()]
    }

    pub fn col_marginals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.assignment.len()];
        for &j in &self.assignment {
            out[j] += self.mass;
        }
        out
    }
}

/// Minimum-cost perfect assignment on an n x n row-major cost matrix;
/// O(n^3) Hungarian method with row/column potentials. Returns the column
/// assigned to each row and the total cost.
pub fn solve_assignment(cost: &[f64], n: usize) -> (Vec<usize>, f64) {
    assert_eq!(cost.len(), n * n);
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    // 1-based with a virtual column 0
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // row currently assigned to column j
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let slack = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if slack < min_slack[j] {
                    min_slack[j] = slack;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        // augment along the alternating path
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![usize::MAX; n];
    for j in 1..=n {
        if matched_row[j] > 0 {
            row_to_col[matched_row[j] - 1] = j - 1;
        }
    }
    debug_assert!(row_to_col.iter().all(|&c| c != usize::MAX));
    let total = (0..n).map(|i| cost[i * n + row_to_col[i]]).sum();
    (row_to_col, total)
}

/// Earth mover's distance between two equal-count particle sets under uniform
/// weights and Euclidean ground cost.
pub fn emd(source: &[Vec2], target: &[Vec2]) -> Result<f64> {
    if source.len() != target.len() {
        return Err(Error::Contract(format!(
            "EMD requires equal particle counts, got {} vs {}",
            source.len(),
            target.len()
        )));
    }
    if source.is_empty() {
        return Ok(0.0);
    }
    Ok(TransportProblem::uniform_euclidean(source, target)?
        .solve()?
        .value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_points(n: usize, rng: &mut impl Rng) -> Vec<Vec2> {
        (0..n)
            .map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect()
    }

    /// Exhaustive minimum over all n! assignments.
    fn brute_force_emd(a: &[Vec2], b: &[Vec2]) -> f64 {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &mut |p| {
            let total: f64 = (0..n)
                .map(|i| {
                    let dx = a[i][0] - b[p[i]][0];
                    let dy = a[i][1] - b[p[i]][1];
                    (dx * dx + dy * dy).sqrt()
                })
                .sum();
            if total < best {
                best = total;
            }
        });
        best / n as f64
    }

    fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            visit(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, visit);
            items.swap(k, i);
        }
    }

    #[test]
    fn identical_sets_have_zero_distance() {
        let mut rng = crate::rng::rng_for(1, 0, 0);
        let a = random_points(20, &mut rng);
        assert_eq!(emd(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn permutation_invariance_is_exact() {
        let mut rng = crate::rng::rng_for(2, 0, 0);
        let a = random_points(15, &mut rng);
        let mut b = a.clone();
        b.reverse();
        assert_eq!(emd(&a, &b).unwrap(), 0.0);
        assert_eq!(emd(&b, &a).unwrap(), 0.0);
    }

    #[test]
    fn matches_factorial_brute_force() {
        let mut rng = crate::rng::rng_for(3, 0, 0);
        for _ in 0..40 {
            let n = rng.random_range(1..=7);
            let a = random_points(n, &mut rng);
            let b = random_points(n, &mut rng);
            let fast = emd(&a, &b).unwrap();
            let brute = brute_force_emd(&a, &b);
            assert!(
                (fast - brute).abs() < 1e-9,
                "n={n}: {fast} vs brute {brute}"
            );
        }
    }

    #[test]
    fn translation_moves_every_particle_by_the_shift() {
        let mut rng = crate::rng::rng_for(4, 0, 0);
        for _ in 0..20 {
            let a = random_points(rng.random_range(2..30), &mut rng);
            let t = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
            let b: Vec<Vec2> = a.iter().map(|p| [p[0] + t[0], p[1] + t[1]]).collect();
            let d = emd(&a, &b).unwrap();
            let norm = (t[0] * t[0] + t[1] * t[1]).sqrt();
            assert!((d - norm).abs() < 1e-9, "{d} vs |t| {norm}");
        }
    }

    #[test]
    fn symmetry_and_triangle_inequality() {
        let mut rng = crate::rng::rng_for(5, 0, 0);
        for _ in 0..10 {
            let n = rng.random_range(2..12);
            let a = random_points(n, &mut rng);
            let b = random_points(n, &mut rng);
            let c = random_points(n, &mut rng);
            let ab = emd(&a, &b).unwrap();
            let ba = emd(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-9);
            let ac = emd(&a, &c).unwrap();
            let cb = emd(&c, &b).unwrap();
            assert!(ab <= ac + cb + 1e-9, "triangle: {ab} > {ac} + {cb}");
        }
    }

    #[test]
    fn plan_marginals_are_uniform() {
        let mut rng = crate::rng::rng_for(6, 0, 0);
        let a = random_points(9, &mut rng);
        let b = random_points(9, &mut rng);
        let plan = TransportProblem::uniform_euclidean(&a, &b)
            .unwrap()
            .solve()
            .unwrap();
        let expect = 1.0 / 9.0;
        for w in plan.row_marginals().iter().chain(plan.col_marginals().iter()) {
            assert!((w - expect).abs() < 1e-9);
        }
        assert!(plan.mass > 0.0);
    }

    #[test]
    fn mismatched_counts_are_rejected() {
        let a = random_points(3, &mut crate::rng::rng_for(7, 0, 0));
        let b = random_points(4, &mut crate::rng::rng_for(8, 0, 0));
        assert!(emd(&a, &b).is_err());
    }
}
