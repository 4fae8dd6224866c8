//! Dense linear-algebra kernel for finite-dimensional ambient spaces.
//!
//! Everything here works on `f64` slices: Gram matrices and their
//! determinants, a cyclic Jacobi eigensolver for symmetric matrices, the
//! weighted covariance spectrum of a point cloud, affine flats with an
//! orthonormal direction basis, and elementary symmetric polynomials.

use serde::{Deserialize, Serialize};

use crate::error::{GcnError, Result};

/// Tolerance on orthonormality of flat bases and spectrum vectors.
pub const ORTHO_TOL: f64 = 1e-10;

/// Negative Gram determinants / eigenvalues above this value are clamped to 0.
pub const NEG_CLAMP: f64 = -1e-12;

/// Relative stopping threshold for the Jacobi sweeps (off-diagonal vs Frobenius norm).
pub const JACOBI_REL_TOL: f64 = 1e-13;

const JACOBI_MAX_SWEEPS: usize = 100;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn check_dims<V: AsRef<[f64]>>(vectors: &[V]) -> Result<usize> {
    let dim = vectors.first().map(|v| v.as_ref().len()).unwrap_or(0);
    for v in vectors {
        if v.as_ref().len() != dim {
            return Err(GcnError::DimensionMismatch {
                expected: dim,
                got: v.as_ref().len(),
            });
        }
    }
    Ok(dim)
}

/// Row-major Gram matrix `G[i][j] = <v_i, v_j>`.
pub fn gram_matrix<V: AsRef<[f64]>>(vectors: &[V]) -> Vec<f64> {
    let n = vectors.len();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = dot(vectors[i].as_ref(), vectors[j].as_ref());
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    g
}

/// Determinant of a row-major `n x n` matrix by Gaussian elimination with
/// partial pivoting. The input is consumed as scratch space.
pub fn determinant(mut a: Vec<f64>, n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
            .unwrap_or(col);
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in (col + 1)..n {
            let f = a[r * n + col] / p;
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
            }
        }
    }
    det
}

/// Determinant of the Gram matrix of `vectors`, i.e. the squared n-volume
/// of the parallelotope they span.
///
/// More vectors than the ambient dimension always span a degenerate
/// parallelotope, so that case returns 0 directly.
pub fn gram_det<V: AsRef<[f64]>>(vectors: &[V]) -> Result<f64> {
    let dim = check_dims(vectors)?;
    let n = vectors.len();
    if n == 0 {
        return Ok(1.0);
    }
    if n > dim {
        return Ok(0.0);
    }
    let det = determinant(gram_matrix(vectors), n);
    if det < NEG_CLAMP {
        return Err(GcnError::Numerical(format!(
            "Gram determinant {det:e} is negative beyond rounding"
        )));
    }
    Ok(det.max(0.0))
}

/// Orthonormalizes `vectors` by Gram-Schmidt with one re-orthogonalization
/// pass, dropping any direction whose residual norm is at most `rank_tol`.
pub fn orthonormal_basis<V: AsRef<[f64]>>(vectors: &[V], rank_tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut r = v.as_ref().to_vec();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&r, b);
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let len = norm(&r);
        if len > rank_tol {
            r.iter_mut().for_each(|x| *x /= len);
            basis.push(r);
        }
    }
    basis
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues nonincreasing.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `vectors[i]` is the unit eigenvector for `values[i]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi eigensolver for a row-major symmetric `n x n` matrix.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops below
/// `JACOBI_REL_TOL * ||A||_F`. Equal eigenvalues keep the order of their
/// diagonal positions.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> Result<SymmetricEigen> {
    if matrix.len() != n * n {
        return Err(GcnError::DimensionMismatch {
            expected: n * n,
            got: matrix.len(),
        });
    }
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = JACOBI_REL_TOL * frob;
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    s += a[p * n + q] * a[p * n + q];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= target {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(GcnError::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep diagonal order
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
        .collect();
    Ok(SymmetricEigen { values, vectors })
}

/// Singular values `sigma_i` (nonincreasing) and right vectors `v_i` of the
/// data-to-features operator of a discrete measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl Spectrum {
    /// Squared singular values, i.e. the covariance eigenvalues.
    pub fn squared(&self) -> Vec<f64> {
        self.values.iter().map(|s| s * s).collect()
    }

    /// `sum_{i > d} sigma_i^2`.
    pub fn tail(&self, d: usize) -> f64 {
        self.values.iter().skip(d).map(|s| s * s).sum()
    }
}

/// Spectrum of `C = sum_j w_j (x_j - c)(x_j - c)^T`.
///
/// With `center` equal to the weighted mean this is the spectrum of the
/// data-to-features operator; any other center gives the second-moment
/// operator about that point (used for flats constrained through it).
pub fn weighted_spectrum<V: AsRef<[f64]>>(
    points: &[V],
    weights: &[f64],
    center: &[f64],
) -> Result<Spectrum> {
    if points.len() != weights.len() {
        return Err(GcnError::InvalidWeights(format!(
            "{} points but {} weights",
            points.len(),
            weights.len()
        )));
    }
    if points.is_empty() {
        return Err(GcnError::InvalidMeasure("no atoms".into()));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(GcnError::InvalidWeights("negative or NaN weight".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(GcnError::InvalidWeights(format!(
            "weights sum to {total}, expected 1"
        )));
    }
    let dim = center.len();
    for p in points {
        if p.as_ref().len() != dim {
            return Err(GcnError::DimensionMismatch {
                expected: dim,
                got: p.as_ref().len(),
            });
        }
    }

    let mut cov = vec![0.0; dim * dim];
    let mut shifted = vec![0.0; dim];
    for (p, &w) in points.iter().zip(weights) {
        for (s, (x, c)) in shifted.iter_mut().zip(p.as_ref().iter().zip(center)) {
            *s = x - c;
        }
        for r in 0..dim {
            let wr = w * shifted[r];
            for c in r..dim {
                cov[r * dim + c] += wr * shifted[c];
            }
        }
    }
    for r in 0..dim {
        for c in 0..r {
            cov[r * dim + c] = cov[c * dim + r];
        }
    }
    let scale = cov.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let eig = symmetric_eigen(&cov, dim)?;
    let mut values = Vec::with_capacity(dim);
    for &lambda in &eig.values {
        if lambda < NEG_CLAMP * scale {
            return Err(GcnError::Numerical(format!(
                "covariance eigenvalue {lambda:e} is negative beyond rounding"
            )));
        }
        values.push(lambda.max(0.0).sqrt());
    }
    Ok(Spectrum {
        values,
        vectors: eig.vectors,
    })
}

/// A d-dimensional affine subspace `base + span(basis)`, basis orthonormal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineFlat {
    pub base: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

impl AffineFlat {
    /// Validates that `basis` is orthonormal (within `ORTHO_TOL`) and
    /// matches the dimension of `base`.
    pub fn new(base: Vec<f64>, basis: Vec<Vec<f64>>) -> Result<Self> {
        let dim = base.len();
        if basis.len() > dim {
            return Err(GcnError::InvalidArgument(format!(
                "{} directions in a {dim}-dimensional space",
                basis.len()
            )));
        }
        for (i, b) in basis.iter().enumerate() {
            if b.len() != dim {
                return Err(GcnError::DimensionMismatch {
                    expected: dim,
                    got: b.len(),
                });
            }
            for (j, c) in basis.iter().enumerate().take(i + 1) {
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot(b, c) - want).abs() > ORTHO_TOL {
                    return Err(GcnError::InvalidArgument(
                        "flat basis is not orthonormal".into(),
                    ));
                }
            }
        }
        Ok(Self { base, basis })
    }

    /// The 0-flat `{p}`.
    pub fn point(p: Vec<f64>) -> Self {
        Self {
            base: p,
            basis: Vec::new(),
        }
    }

    /// Flat through `base` spanned by `directions` (not necessarily
    /// orthonormal); directions with residual at most `rank_tol` are dropped.
    pub fn spanned<V: AsRef<[f64]>>(base: Vec<f64>, directions: &[V], rank_tol: f64) -> Self {
        Self {
            basis: orthonormal_basis(directions, rank_tol),
            base,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    /// Squared distance without dimension checks (hot path).
    #[inline]
    pub fn dist2_unchecked(&self, p: &[f64]) -> f64 {
        let mut r: f64 = p
            .iter()
            .zip(&self.base)
            .map(|(x, b)| (x - b) * (x - b))
            .sum();
        for b in &self.basis {
            let c: f64 = p
                .iter()
                .zip(&self.base)
                .zip(b)
                .map(|((x, o), e)| (x - o) * e)
                .sum();
            r -= c * c;
        }
        r.max(0.0)
    }

    /// Orthogonal projection of `p` onto the flat.
    pub fn project(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check(p)?;
        let rel = sub(p, &self.base);
        let mut out = self.base.clone();
        for b in &self.basis {
            let c = dot(&rel, b);
            out.iter_mut().zip(b).for_each(|(o, e)| *o += c * e);
        }
        Ok(out)
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.base.len() {
            return Err(GcnError::DimensionMismatch {
                expected: self.base.len(),
                got: p.len(),
            });
        }
        Ok(())
    }
}

/// Euclidean distance from `p` to the flat, `||(I - P_V)(p - base)||`.
pub fn dist_to_flat(p: &[f64], flat: &AffineFlat) -> Result<f64> {
    flat.check(p)?;
    let rel = sub(p, &flat.base);
    let mut r = rel.clone();
    for b in &flat.basis {
        let c = dot(&rel, b);
        r.iter_mut().zip(b).for_each(|(x, e)| *x -= c * e);
    }
    Ok(norm(&r))
}

/// Elementary symmetric polynomial `e_k(values)` via the rolling update
/// `e_j <- e_j + a * e_{j-1}` (all terms nonnegative, so no cancellation).
pub fn elementary_symmetric(values: &[f64], k: usize) -> f64 {
    if k > values.len() {
        return 0.0;
    }
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (seen, &a) in values.iter().enumerate() {
        for j in (1..=k.min(seen + 1)).rev() {
            e[j] += a * e[j - 1];
        }
    }
    e[k]
}
