//! Ordered simplices and their elementary geometric functionals.
//!
//! The free functions take a vertex list `&[&[f64]]` so that enumeration
//! loops can evaluate tuples without copying points; [`Simplex`] is the
//! owned counterpart used at API boundaries.

use serde::{Deserialize, Serialize};

use crate::error::{GcnError, Result};
use crate::linalg::{dist, dot, orthonormal_basis};

/// Relative rank tolerance used when spanning the affine hull of vertices.
pub const SPAN_RANK_TOL: f64 = 1e-10;

/// Relative residual below which an edge is treated as lying in the span of
/// the previous ones.
pub const DEGENERATE_REL: f64 = 1e-12;

/// n-volume `M_n` of the parallelotope spanned by `x_j - x_0`, j = 1..n.
///
/// Computed as the product of Gram-Schmidt residual norms (with one
/// re-orthogonalization pass), which equals `sqrt(det Gram)` and is
/// nonnegative by construction. A residual below `DEGENERATE_REL` times its
/// edge length is rounding noise and yields exactly 0. A single vertex has
/// `M_0 = 1`.
pub fn volume(v: &[&[f64]]) -> f64 {
    let n = v.len().saturating_sub(1);
    if n == 0 {
        return 1.0;
    }
    let dim = v[0].len();
    if n > dim {
        return 0.0;
    }
    let mut q = vec![0.0; n * dim];
    let mut vol = 1.0;
    for k in 0..n {
        let (done, rest) = q.split_at_mut(k * dim);
        let r = &mut rest[..dim];
        for (x, (a, b)) in r.iter_mut().zip(v[k + 1].iter().zip(v[0])) {
            *x = a - b;
        }
        let edge = dot(r, r).sqrt();
        for _ in 0..2 {
            for b in done.chunks_exact(dim) {
                let c = dot(r, b);
                r.iter_mut().zip(b).for_each(|(x, e)| *x -= c * e);
            }
        }
        let len = dot(r, r).sqrt();
        if len <= DEGENERATE_REL * edge {
            return 0.0;
        }
        vol *= len;
        r.iter_mut().for_each(|x| *x /= len);
    }
    vol
}

fn edges<'a>(v: &'a [&'a [f64]]) -> impl Iterator<Item = f64> + 'a {
    (0..v.len()).flat_map(move |i| ((i + 1)..v.len()).map(move |j| dist(v[i], v[j])))
}

/// Maximal edge length.
pub fn diam(v: &[&[f64]]) -> f64 {
    edges(v).fold(0.0, f64::max)
}

/// Minimal edge length (0 for a single vertex).
pub fn min_edge(v: &[&[f64]]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    edges(v).fold(f64::INFINITY, f64::min)
}

pub fn max_at0(v: &[&[f64]]) -> f64 {
    v.iter().skip(1).map(|x| dist(x, v[0])).fold(0.0, f64::max)
}

pub fn min_at0(v: &[&[f64]]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    v.iter()
        .skip(1)
        .map(|x| dist(x, v[0]))
        .fold(f64::INFINITY, f64::min)
}

/// `min_at0 / max_at0`; undefined when any edge has zero length.
pub fn scale_at0(v: &[&[f64]]) -> Result<f64> {
    if v.len() < 2 || min_edge(v) == 0.0 {
        return Err(GcnError::UndefinedScale);
    }
    Ok(min_at0(v) / max_at0(v))
}

/// Distance from vertex `i` to the affine hull of the other vertices.
pub fn height(v: &[&[f64]], i: usize) -> f64 {
    let others: Vec<&[f64]> = v
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, x)| *x)
        .collect();
    let Some(base) = others.first() else {
        return 0.0;
    };
    let dirs: Vec<Vec<f64>> = others[1..]
        .iter()
        .map(|x| x.iter().zip(*base).map(|(a, b)| a - b).collect())
        .collect();
    let largest = dirs.iter().map(|d| dot(d, d).sqrt()).fold(0.0, f64::max);
    let basis = orthonormal_basis(&dirs, SPAN_RANK_TOL * largest);
    let mut r: Vec<f64> = v[i].iter().zip(*base).map(|(a, b)| a - b).collect();
    for _ in 0..2 {
        for b in &basis {
            let c = dot(&r, b);
            r.iter_mut().zip(b).for_each(|(x, e)| *x -= c * e);
        }
    }
    dot(&r, &r).sqrt()
}

/// Polar sine at vertex `i`: `M_n / prod_{j != i} ||x_j - x_i||`, and
/// exactly 0 when some edge has zero length.
pub fn polar_sine(v: &[&[f64]], i: usize) -> f64 {
    if min_edge(v) == 0.0 {
        return 0.0;
    }
    let denom: f64 = v
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, x)| dist(x, v[i]))
        .product();
    volume(v) / denom
}

/// An ordered tuple of vertices `(x_0, ..., x_n)` in a common ambient space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    vertices: Vec<Vec<f64>>,
}

impl Simplex {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(GcnError::InvalidArgument(
                "simplex needs at least one vertex".into(),
            ));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(GcnError::InvalidArgument(
                "zero-dimensional ambient space".into(),
            ));
        }
        for v in &vertices {
            if v.len() != dim {
                return Err(GcnError::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(GcnError::InvalidArgument(
                    "non-finite vertex coordinate".into(),
                ));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Number of vertices minus one.
    pub fn order(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn refs(&self) -> Vec<&[f64]> {
        self.vertices.iter().map(Vec::as_slice).collect()
    }

    pub fn volume(&self) -> f64 {
        volume(&self.refs())
    }

    pub fn diam(&self) -> f64 {
        diam(&self.refs())
    }

    pub fn min_edge(&self) -> f64 {
        min_edge(&self.refs())
    }

    pub fn max_at0(&self) -> f64 {
        max_at0(&self.refs())
    }

    pub fn min_at0(&self) -> f64 {
        min_at0(&self.refs())
    }

    pub fn scale_at0(&self) -> Result<f64> {
        scale_at0(&self.refs())
    }

    pub fn height(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(height(&self.refs(), i))
    }

    pub fn polar_sine(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(polar_sine(&self.refs(), i))
    }

    /// `X(i)`: the tuple with the i-th vertex removed.
    pub fn remove_vertex(&self, i: usize) -> Result<Simplex> {
        self.check_index(i)?;
        if self.vertices.len() == 1 {
            return Err(GcnError::InvalidArgument(
                "cannot remove the only vertex".into(),
            ));
        }
        let mut vertices = self.vertices.clone();
        vertices.remove(i);
        Ok(Simplex { vertices })
    }

    /// `X(y, i)`: the tuple with the i-th vertex replaced by `y`.
    pub fn replace_vertex(&self, y: Vec<f64>, i: usize) -> Result<Simplex> {
        self.check_index(i)?;
        if y.len() != self.ambient_dim() {
            return Err(GcnError::DimensionMismatch {
                expected: self.ambient_dim(),
                got: y.len(),
            });
        }
        let mut vertices = self.vertices.clone();
        vertices[i] = y;
        Ok(Simplex { vertices })
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.vertices.len() {
            return Err(GcnError::IndexOutOfRange {
                index: i,
                len: self.vertices.len(),
            });
        }
        Ok(())
    }
}
