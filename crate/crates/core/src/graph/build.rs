//! Fixed-radius neighbor search via uniform spatial hashing with cell size
//! equal to the radius. Output is canonical: sorted (sender, receiver) pairs,
//! both directions present, no self-edges.

use crate::Vec2;
use std::collections::HashMap;

pub fn build_graph(positions: &[Vec2], radius: f64) -> Vec<(u32, u32)> {
    assert!(radius > 0.0, "connectivity radius must be positive");
    let inv = 1.0 / radius;
    let r2 = radius * radius;
    let mut bins: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
    let key = |p: &Vec2| ((p[0] * inv).floor() as i64, (p[1] * inv).floor() as i64);
    for (i, p) in positions.iter().enumerate() {
        bins.entry(key(p)).or_default().push(i as u32);
    }
    let mut edges = Vec::new();
    for (i, p) in positions.iter().enumerate() {
        let (cx, cy) = key(p);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let Some(bin) = bins.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &j in bin {
                    if j as usize == i {
                        continue;
                    }
                    let q = positions[j as usize];
                    let ddx = p[0] - q[0];
                    let ddy = p[1] - q[1];
                    if ddx * ddx + ddy * ddy <= r2 {
                        edges.push((i as u32, j));
                    }
                }
            }
        }
    }
    edges.sort_unstable();
    edges
}
