//! Small reference measures and seeded random generators used by tests,
//! the CLI and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::measure::DiscreteMeasure;

/// Uniform measure on the vertices of the unit right triangle
/// `{(0,0), (1,0), (0,1)}`.
pub fn t3() -> DiscreteMeasure {
    DiscreteMeasure::uniform(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
}

/// Uniform measure on `{(+-1, 0), (0, +-1)}`.
pub fn sq4() -> DiscreteMeasure {
    DiscreteMeasure::uniform(vec![
        vec![1.0, 0.0],
        vec![-1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.0, -1.0],
    ])
    .unwrap()
}

/// Three collinear atoms `(0,0), (1,0), (2,0)`.
pub fn collinear3() -> DiscreteMeasure {
    DiscreteMeasure::uniform(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap()
}

/// Looks a fixture up by name (`t3`, `sq4`, `collinear3`).
pub fn by_name(name: &str) -> Option<DiscreteMeasure> {
    match name.to_ascii_lowercase().as_str() {
        "t3" => Some(t3()),
        "sq4" => Some(sq4()),
        "collinear3" => Some(collinear3()),
        _ => None,
    }
}

/// Atomic measure with `n` atoms uniform in `[-1, 1]^dim` and random
/// positive weights bounded away from 0.
pub fn random_measure(rng: &mut impl Rng, n: usize, dim: usize) -> DiscreteMeasure {
    let atoms = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let weights = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    DiscreteMeasure::normalized(atoms, weights).unwrap()
}

/// Seeded variant of [`random_measure`].
pub fn random_measure_seeded(seed: u64, n: usize, dim: usize) -> DiscreteMeasure {
    random_measure(&mut ChaCha8Rng::seed_from_u64(seed), n, dim)
}

/// `n` points uniform in the unit cube `[0, 1]^dim`, uniformly weighted.
pub fn uniform_cube(seed: u64, n: usize, dim: usize) -> DiscreteMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    DiscreteMeasure::uniform(atoms).unwrap()
}

/// Two orthogonal segments through the origin in the plane, `per_line`
/// points on each (positions uniform in `[-1, 1]`) with Gaussian noise of
/// standard deviation `noise` across the line. Returns the points and their
/// ground-truth line labels.
pub fn two_lines(seed: u64, per_line: usize, noise: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise).expect("noise must be finite and nonnegative");
    let mut points = Vec::with_capacity(2 * per_line);
    let mut labels = Vec::with_capacity(2 * per_line);
    for line in 0..2 {
        for _ in 0..per_line {
            let along = rng.random_range(-1.0..1.0);
            let across = normal.sample(&mut rng);
            points.push(if line == 0 {
                vec![along, across]
            } else {
                vec![across, along]
            });
            labels.push(line);
        }
    }
    (points, labels)
}
