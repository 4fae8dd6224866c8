//! Affinities from polar GCNs of sampled tuples, flattened to a pairwise
//! matrix, followed by normalized spectral clustering.
//!
//! This is a small stand-in for spectral curvature clustering: tuples are
//! sampled per point, each tuple contributes `exp(-c_pol / (2 sigma^2))` to
//! every pair it contains, and the resulting matrix is clustered with a
//! normalized-cut embedding and k-means.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GcnError, Result};
use crate::estimators::engine::substream;
use crate::gcn::c_pol;
use crate::linalg::symmetric_eigen;

/// Default number of tuples sampled per point.
pub const DEFAULT_TUPLES_PER_POINT: usize = 100;

const KMEANS_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SccConfig {
    pub d: usize,
    /// Tuning parameter; the median sampled `c_pol` when `None`.
    pub sigma: Option<f64>,
    pub tuples_per_point: usize,
    pub seed: u64,
}

impl SccConfig {
    pub fn new(d: usize, seed: u64) -> Self {
        Self {
            d,
            sigma: None,
            tuples_per_point: DEFAULT_TUPLES_PER_POINT,
            seed,
        }
    }
}

/// Symmetric nonnegative `n x n` matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinityMatrix {
    pub n: usize,
    pub values: Vec<f64>,
    pub sigma: f64,
    pub sampled_tuples: usize,
}

impl AffinityMatrix {
    pub fn from_dense(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(GcnError::DimensionMismatch {
                expected: n * n,
                got: values.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if !(v >= 0.0) || !v.is_finite() || v != values[j * n + i] {
                    return Err(GcnError::InvalidArgument(format!(
                        "affinity ({i}, {j}) must be finite, nonnegative and symmetric"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            values,
            sigma: f64::NAN,
            sampled_tuples: 0,
        })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub k: usize,
    pub labels: Vec<usize>,
    /// Labels in `0..k` that no point received.
    pub empty_clusters: Vec<usize>,
    pub warning: Option<String>,
}

/// Affinity of one tuple with polar GCN `c_pol`.
#[inline]
pub fn tuple_affinity(c_pol: f64, sigma: f64) -> f64 {
    (-c_pol / (2.0 * sigma * sigma)).exp()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Samples `tuples_per_point` tuples `(i, j_1, ..., j_{d+1})` with distinct
/// `j`s per point and accumulates tuple affinities into every contained pair.
pub fn scc_affinities(points: &[Vec<f64>], cfg: &SccConfig) -> Result<AffinityMatrix> {
    let n = points.len();
    let arity = cfg.d + 2;
    if n < arity {
        return Err(GcnError::InvalidArgument(format!(
            "need at least {arity} points for {}-dimensional affinities, got {n}",
            cfg.d
        )));
    }
    if let Some(s) = cfg.sigma {
        if !(s > 0.0) || !s.is_finite() {
            return Err(GcnError::InvalidArgument(format!(
                "sigma must be positive, got {s}"
            )));
        }
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(GcnError::DimensionMismatch {
            expected: dim,
            got: p.len(),
        });
    }

    let sampled: Vec<Vec<(Vec<usize>, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(cfg.seed, i as u64);
            (0..cfg.tuples_per_point)
                .map(|_| {
                    let mut tuple = Vec::with_capacity(arity);
                    tuple.push(i);
                    tuple.extend(sample(&mut rng, n - 1, arity - 1).into_iter().map(|j| {
                        if j >= i {
                            j + 1
                        } else {
                            j
                        }
                    }));
                    let verts: Vec<&[f64]> = tuple.iter().map(|&t| points[t].as_slice()).collect();
                    let c = c_pol(&verts);
                    (tuple, c)
                })
                .collect()
        })
        .collect();

    let sigma = match cfg.sigma {
        Some(s) => s,
        None => {
            let all: Vec<f64> = sampled.iter().flatten().map(|t| t.1).collect();
            let m = if all.is_empty() { 0.0 } else { median(all) };
            if m > 0.0 {
                m
            } else {
                1.0
            }
        }
    };
    let mut values = vec![0.0; n * n];
    let mut count = 0;
    for (tuple, c) in sampled.iter().flatten() {
        let a = tuple_affinity(*c, sigma);
        for (x, &p) in tuple.iter().enumerate() {
            for &q in &tuple[x + 1..] {
                values[p * n + q] += a;
                values[q * n + p] += a;
            }
        }
        count += 1;
    }
    Ok(AffinityMatrix {
        n,
        values,
        sigma,
        sampled_tuples: count,
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Normalized spectral embedding into the top `k` eigenvectors of
/// `D^{-1/2} W D^{-1/2}`, rows rescaled to unit length, then k-means seeded
/// by farthest-point traversal from a seeded start.
pub fn spectral_cluster(w: &AffinityMatrix, k: usize, seed: u64) -> Result<ClusterAssignment> {
    if k == 0 {
        return Err(GcnError::InvalidArgument("k must be >= 1".into()));
    }
    let n = w.n;
    if k > n {
        return Err(GcnError::InvalidArgument(format!(
            "k = {k} exceeds {n} points"
        )));
    }
    let degrees: Vec<f64> = (0..n).map(|i| (0..n).map(|j| w.get(i, j)).sum()).collect();
    if k == 1 || degrees.iter().all(|&d| d == 0.0) {
        let warning = (k > 1)
            .then(|| "affinity matrix is zero; all points assigned to cluster 0".to_string());
        return Ok(ClusterAssignment {
            k,
            labels: vec![0; n],
            empty_clusters: (1..k).collect(),
            warning,
        });
    }
    let inv_sqrt: Vec<f64> = degrees
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = inv_sqrt[i] * w.get(i, j) * inv_sqrt[j];
        }
    }
    let eig = symmetric_eigen(&m, n)?;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r: Vec<f64> = eig.vectors[..k].iter().map(|v| v[i]).collect();
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                r.iter_mut().for_each(|x| *x /= norm);
            }
            r
        })
        .collect();
    let labels = kmeans(&rows, k, seed);
    let empty_clusters = (0..k).filter(|c| !labels.contains(c)).collect();
    Ok(ClusterAssignment {
        k,
        labels,
        empty_clusters,
        warning: None,
    })
}

fn kmeans(rows: &[Vec<f64>], k: usize, seed: u64) -> Vec<usize> {
    use rand::Rng;
    let n = rows.len();
    let first = substream(seed, 0).random_range(0..n);
    let mut centers = vec![rows[first].clone()];
    let mut nearest: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centers[0])).collect();
    while centers.len() < k {
        let mut far = 0;
        for i in 1..n {
            if nearest[i] > nearest[far] {
                far = i;
            }
        }
        centers.push(rows[far].clone());
        for (i, r) in rows.iter().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(r, &rows[far]));
        }
    }
    let assign = |centers: &[Vec<f64>]| -> Vec<usize> {
        rows.iter()
            .map(|r| {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (c, center) in centers.iter().enumerate() {
                    let d = sq_dist(r, center);
                    if d < best_d {
                        best_d = d;
                        best = c;
                    }
                }
                best
            })
            .collect()
    };
    let mut labels = assign(&centers);
    for _ in 0..KMEANS_MAX_ITER {
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = rows
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == c)
                .map(|(r, _)| r)
                .collect();
            if members.is_empty() {
                continue;
            }
            for (x, slot) in center.iter_mut().enumerate() {
                *slot = members.iter().map(|r| r[x]).sum::<f64>() / members.len() as f64;
            }
        }
        let next = assign(&centers);
        if next == labels {
            break;
        }
        labels = next;
    }
    labels
}

/// Fraction of points labelled correctly under the best matching of
/// cluster labels to ground-truth labels (both in `0..k`, small `k`).
pub fn clustering_accuracy(labels: &[usize], truth: &[usize], k: usize) -> f64 {
    assert_eq!(labels.len(), truth.len());
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0;
    loop {
        let hits = labels
            .iter()
            .zip(truth)
            .filter(|(&l, &t)| l < k && perm[l] == t)
            .count();
        best = best.max(hits);
        // next lexicographic permutation
        let Some(i) = (1..k).rev().find(|&i| perm[i - 1] < perm[i]) else {
            break;
        };
        let j = (i..k).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    best as f64 / labels.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::two_lines;

    #[test]
    fn collinear_tuples_have_unit_affinity() {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let cfg = SccConfig {
            sigma: Some(0.3),
            tuples_per_point: 5,
            ..SccConfig::new(1, 3)
        };
        let w = scc_affinities(&pts, &cfg).unwrap();
        let total: f64 = w.values.iter().sum();
        // each tuple adds 1 to 3 pairs, counted in both triangles
        assert!((total - (6 * 5 * 3 * 2) as f64).abs() < 1e-9);
    }

    #[test]
    fn too_few_points() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        assert!(scc_affinities(&pts, &SccConfig::new(1, 0)).is_err());
    }

    #[test]
    fn block_diagonal_recovery() {
        let n = 8;
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if (i < 4) == (j < 4) && i != j {
                    v[i * n + j] = 1.0;
                }
            }
        }
        let w = AffinityMatrix::from_dense(n, v).unwrap();
        let c = spectral_cluster(&w, 2, 1).unwrap();
        let truth: Vec<usize> = (0..n).map(|i| usize::from(i >= 4)).collect();
        assert_eq!(clustering_accuracy(&c.labels, &truth, 2), 1.0);
        let one = spectral_cluster(&w, 1, 1).unwrap();
        assert!(one.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn zero_matrix_warns() {
        let w = AffinityMatrix::from_dense(3, vec![0.0; 9]).unwrap();
        let c = spectral_cluster(&w, 2, 0).unwrap();
        assert!(c.warning.is_some() && c.labels == vec![0; 3]);
    }

    #[test]
    fn two_lines_within_exceeds_cross() {
        let (pts, truth) = two_lines(4, 30, 0.02);
        let w = scc_affinities(&pts, &SccConfig::new(1, 4)).unwrap();
        let (mut within, mut cross, mut nw, mut nc) = (0.0, 0.0, 0, 0);
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i == j {
                    continue;
                }
                if truth[i] == truth[j] {
                    within += w.get(i, j);
                    nw += 1;
                } else {
                    cross += w.get(i, j);
                    nc += 1;
                }
            }
        }
        assert!(within / nw as f64 > cross / nc as f64);
    }

    #[test]
    fn accuracy_is_permutation_invariant() {
        assert_eq!(clustering_accuracy(&[1, 1, 0], &[0, 0, 1], 2), 1.0);
        assert!((clustering_accuracy(&[0, 1, 0, 1], &[0, 0, 0, 1], 2) - 0.75).abs() < 1e-15);
    }
}
