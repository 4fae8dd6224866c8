//! Volume sampling: choose d atoms with probability proportional to the
//! squared volume of the simplex they span with the center of mass, and
//! approximate `mu` by the flat through that simplex.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{GcnError, Result};
use crate::estimators::engine::{check_cap, substream, unit_f64, CompensatedSum};
use crate::linalg::{sub, AffineFlat};
use crate::measure::DiscreteMeasure;
use crate::simplex::{self, SPAN_RANK_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFlat {
    /// Ordered atom indices that were drawn.
    pub tuple: Vec<usize>,
    pub flat: AffineFlat,
}

fn anchored_volume_sq(mu: &DiscreteMeasure, x_cm: &[f64], tuple: &[usize]) -> f64 {
    let mut verts: Vec<&[f64]> = Vec::with_capacity(tuple.len() + 1);
    verts.push(x_cm);
    verts.extend(tuple.iter().map(|&i| mu.atom(i)));
    let v = simplex::volume(&verts);
    v * v
}

fn flat_through(mu: &DiscreteMeasure, x_cm: &[f64], tuple: &[usize]) -> AffineFlat {
    let dirs: Vec<Vec<f64>> = tuple.iter().map(|&i| sub(mu.atom(i), x_cm)).collect();
    let largest = dirs
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    AffineFlat::spanned(x_cm.to_vec(), &dirs, SPAN_RANK_TOL * largest)
}

/// Every ordered d-tuple with positive probability, in lexicographic order,
/// with its sampling probability.
pub fn volume_sampling_distribution(
    mu: &DiscreteMeasure,
    d: usize,
    cap: f64,
) -> Result<Vec<(Vec<usize>, f64)>> {
    check_cap(mu.len(), d, cap)?;
    let x_cm = mu.center_of_mass();
    let w = mu.weights();
    let n = mu.len();
    let mut entries = Vec::new();
    let mut total = CompensatedSum::default();
    let mut idx = vec![0usize; d];
    loop {
        let weight: f64 = idx.iter().map(|&i| w[i]).product();
        let mass = weight * anchored_volume_sq(mu, &x_cm, &idx);
        if mass > 0.0 {
            total.add(mass);
            entries.push((idx.clone(), mass));
        }
        let mut j = d;
        loop {
            if j == 0 {
                let total = total.value();
                let floor = 1e-13 * mu.diameter().powi(2 * d as i32);
                if !(total > floor) {
                    return Err(GcnError::DegenerateMeasure(format!(
                        "every {d}-simplex through the center of mass is degenerate"
                    )));
                }
                for e in entries.iter_mut() {
                    e.1 /= total;
                }
                return Ok(entries);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Draws one flat by volume sampling; deterministic in `seed`.
pub fn volume_sample_flat(
    mu: &DiscreteMeasure,
    d: usize,
    seed: u64,
    cap: f64,
) -> Result<SampledFlat> {
    let dist = volume_sampling_distribution(mu, d, cap)?;
    let u = unit_f64(substream(seed, 0).next_u64());
    let mut acc = 0.0;
    let mut chosen = &dist[dist.len() - 1].0;
    for (tuple, p) in &dist {
        acc += p;
        if u < acc {
            chosen = tuple;
            break;
        }
    }
    let x_cm = mu.center_of_mass();
    Ok(SampledFlat {
        tuple: chosen.clone(),
        flat: flat_through(mu, &x_cm, chosen),
    })
}

/// Expected `int dist^2(y, L) dmu(y)` over volume-sampled flats `L`,
/// computed by projecting every atom onto every sampled flat.
pub fn volume_sampling_expected_error(mu: &DiscreteMeasure, d: usize, cap: f64) -> Result<f64> {
    let dist = volume_sampling_distribution(mu, d, cap)?;
    let x_cm = mu.center_of_mass();
    Ok(dist
        .iter()
        .map(|(tuple, p)| {
            let flat = flat_through(mu, &x_cm, tuple);
            let err: f64 = mu
                .atoms()
                .iter()
                .zip(mu.weights())
                .map(|(y, w)| w * flat.dist2_unchecked(y))
                .sum();
            p * err
        })
        .collect::<CompensatedSum>()
        .value())
}
