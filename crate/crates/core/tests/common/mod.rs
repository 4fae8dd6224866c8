#![allow(dead_code)]

use gcnlab_core::DiscreteMeasure;
use proptest::prelude::*;

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

pub fn points(n: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), n)
}

/// Random atomic measure with `n` atoms in `R^dim`, weights bounded away
/// from zero.
pub fn measure(
    n: impl Into<prop::sample::SizeRange>,
    dim: usize,
) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((prop::collection::vec(-1.0f64..1.0, dim), 0.2f64..1.0), n).prop_map(
        |v| {
            let (atoms, weights): (Vec<_>, Vec<_>) = v.into_iter().unzip();
            DiscreteMeasure::normalized(atoms, weights).unwrap()
        },
    )
}

/// `(measure, d)` with `N <= 6`, `D <= 4`, `d <= 2`, `d < D`.
pub fn measure_and_d() -> impl Strategy<Value = (DiscreteMeasure, usize)> {
    (1usize..=4).prop_flat_map(|dim| (measure(2..=6, dim), 0..dim.min(3)))
}

/// `(vertices, d)` of a random `(d+1)`-simplex, `d <= 2`, `D <= 5`.
pub fn simplex() -> impl Strategy<Value = (Vec<Vec<f64>>, usize)> {
    (0usize..=2)
        .prop_flat_map(|d| (d + 1..=5).prop_map(move |dim| (d, dim)))
        .prop_flat_map(|(d, dim)| (points(d + 2, dim), Just(d)))
}

pub fn refs(v: &[Vec<f64>]) -> Vec<&[f64]> {
    v.iter().map(Vec::as_slice).collect()
}
