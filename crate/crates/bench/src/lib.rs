//! Deterministic inputs shared by the benchmarks.

use cutsphere_core::geometry::Halfspace;
use cutsphere_core::Polyhedron;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `rows` random halfspaces with unit-scale normals, each at distance
/// `[0.2, 1.2)` from the origin, so the origin is interior.
pub fn random_polyhedron(n: usize, rows: usize, seed: u64) -> Polyhedron {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..rows)
        .map(|_| {
            let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            Halfspace::new(g, norm * rng.gen_range(0.2..1.2))
        })
        .collect();
    Polyhedron::new(n, rows)
}

/// A random polyhedron clipped to the box `[−1, 1]ⁿ`, hence bounded.
pub fn bounded_polyhedron(n: usize, extra_rows: usize, seed: u64) -> Polyhedron {
    let mut p = random_polyhedron(n, extra_rows, seed);
    p.rows.extend(Polyhedron::boxed(&vec![-1.0; n], &vec![1.0; n]).rows);
    p
}

/// A point well outside the unit ball, seeded.
pub fn far_point(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_deterministic_and_contain_the_origin() {
        let a = random_polyhedron(4, 10, 1);
        assert_eq!(a, random_polyhedron(4, 10, 1));
        assert!(a.contains(&[0.0; 4], 0.0, 0.0));
        assert_eq!(bounded_polyhedron(3, 5, 2).rows.len(), 11);
    }
}
