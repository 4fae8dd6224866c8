//! Geometric condition numbers (GCNs) of a (d+1)-simplex `X = (x_0..x_{d+1})`.
//!
//! The intrinsic dimension is implied by the vertex count: `d = len - 2`.
//! Every function returns 0 on degenerate input instead of failing, since
//! product-measure integrals over atomic measures hit repeated vertices
//! with positive probability.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GcnError, Result};
use crate::linalg::{dist, gram_matrix, symmetric_eigen};
use crate::simplex::{self, volume};

/// The GCN family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GcnKind {
    /// `M_{d+1}(X) / diam(X)^d`
    Vol,
    /// `M_{d+1}(X) / diam(mu)^d`
    VolMu,
    /// diameter times the root-mean-square polar sine
    Pol,
    /// LS error of the empirical measure on the vertices
    Dls,
    /// minimal height
    Ht,
    /// discrete curvature `M_{d+1}(X) / diam(X)^{(d+1)^2}`
    CurvatureVol,
}

impl GcnKind {
    pub const ALL: [GcnKind; 6] = [
        GcnKind::Vol,
        GcnKind::VolMu,
        GcnKind::Pol,
        GcnKind::Dls,
        GcnKind::Ht,
        GcnKind::CurvatureVol,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GcnKind::Vol => "vol",
            GcnKind::VolMu => "vol_mu",
            GcnKind::Pol => "pol",
            GcnKind::Dls => "dls",
            GcnKind::Ht => "ht",
            GcnKind::CurvatureVol => "curvature_vol",
        }
    }

    /// Evaluates the GCN on `x`; `diam_mu` is only read by [`GcnKind::VolMu`].
    #[inline]
    pub fn eval(self, x: &[&[f64]], diam_mu: f64) -> f64 {
        match self {
            GcnKind::Vol => c_vol(x),
            GcnKind::VolMu => vol_mu_unchecked(x, diam_mu),
            GcnKind::Pol => c_pol(x),
            GcnKind::Dls => c_dls(x, None),
            GcnKind::Ht => c_ht(x),
            GcnKind::CurvatureVol => curvature_vol(x),
        }
    }
}

impl fmt::Display for GcnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GcnKind {
    type Err = GcnError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        GcnKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| GcnError::InvalidArgument(format!("unknown GCN kind '{s}'")))
    }
}

fn intrinsic_dim(x: &[&[f64]]) -> i32 {
    x.len() as i32 - 2
}

pub fn c_vol(x: &[&[f64]]) -> f64 {
    let diam = simplex::diam(x);
    if diam == 0.0 {
        return 0.0;
    }
    volume(x) / diam.powi(intrinsic_dim(x))
}

#[inline]
fn vol_mu_unchecked(x: &[&[f64]], diam_mu: f64) -> f64 {
    volume(x) / diam_mu.powi(intrinsic_dim(x))
}

pub fn c_vol_mu(x: &[&[f64]], diam_mu: f64) -> Result<f64> {
    if !(diam_mu > 0.0) {
        return Err(GcnError::InvalidArgument(format!(
            "diam(mu) must be positive, got {diam_mu}"
        )));
    }
    Ok(vol_mu_unchecked(x, diam_mu))
}

/// Polar GCN: `diam(X) * sqrt(sum_i psin_i(X)^2 / (d+2))`.
pub fn c_pol(x: &[&[f64]]) -> f64 {
    let n = x.len();
    let mut d = vec![0.0; n * n];
    let mut diam = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let e = dist(x[i], x[j]);
            if e == 0.0 {
                return 0.0;
            }
            d[i * n + j] = e;
            d[j * n + i] = e;
            diam = diam.max(e);
        }
    }
    let vol = volume(x);
    if vol == 0.0 {
        return 0.0;
    }
    let sum_sq: f64 = (0..n)
        .map(|i| {
            let denom: f64 = (0..n).filter(|&j| j != i).map(|j| d[i * n + j]).product();
            let s = vol / denom;
            s * s
        })
        .sum();
    diam * (sum_sq / n as f64).sqrt()
}

/// Discrete LS GCN: `min_L sqrt(sum_i dist^2(x_i, L) / (d+2))` over d-flats,
/// restricted to flats through `anchored` when given.
pub fn c_dls(x: &[&[f64]], anchored: Option<&[f64]>) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let dim = x[0].len();
    let center: Vec<f64> = match anchored {
        Some(y) => y.to_vec(),
        None => (0..dim)
            .map(|k| x.iter().map(|p| p[k]).sum::<f64>() / n as f64)
            .collect(),
    };
    let shifted: Vec<Vec<f64>> = x
        .iter()
        .map(|p| p.iter().zip(&center).map(|(a, c)| a - c).collect())
        .collect();
    let g = gram_matrix(&shifted);
    if (0..n).all(|i| g[i * n + i] == 0.0) {
        return 0.0;
    }
    let d = n - 2;
    // Gram of the shifted points shares its nonzero spectrum with the
    // second-moment operator, so the tail beyond the top d is the residual.
    let tail: f64 = match symmetric_eigen(&g, n) {
        Ok(e) => e.values.iter().skip(d).map(|v| v.max(0.0)).sum(),
        Err(_) => return f64::NAN,
    };
    (tail / n as f64).sqrt()
}

/// Minimal height over all vertices.
pub fn c_ht(x: &[&[f64]]) -> f64 {
    (0..x.len())
        .map(|i| simplex::height(x, i))
        .fold(f64::INFINITY, f64::min)
        .min(f64::MAX)
}

/// `M_{d+1}(X) / diam(X)^{(d+1)^2}`, 0 when `diam(X) = 0`.
pub fn curvature_vol(x: &[&[f64]]) -> f64 {
    let diam = simplex::diam(x);
    if diam == 0.0 {
        return 0.0;
    }
    let e = (x.len() as i32 - 1).pow(2);
    volume(x) / diam.powi(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    const T: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]];
    const DEGEN: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]];

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn vol_examples() {
        assert!(close(c_vol(&[&[0.0], &[3.0]]), 3.0));
        assert!(close(c_vol(&T), 1.0 / 2f64.sqrt()));
        assert_eq!(c_vol(&DEGEN), 0.0);
        assert_eq!(c_vol(&[&[1.0], &[1.0]]), 0.0);
    }

    #[test]
    fn vol_mu_examples() {
        assert!(close(c_vol_mu(&T, 2f64.sqrt()).unwrap(), 1.0 / 2f64.sqrt()));
        assert_eq!(c_vol_mu(&DEGEN, 1.0).unwrap(), 0.0);
        assert!(close(c_vol_mu(&[&[0.0], &[2.5]], 17.0).unwrap(), 2.5));
        assert!(c_vol_mu(&T, 0.0).is_err());
    }

    #[test]
    fn pol_examples() {
        // sines 1, 1/sqrt2, 1/sqrt2 -> sqrt(2/3) * sqrt2
        assert!(close(c_pol(&T), 2.0 / 3f64.sqrt()));
        assert_eq!(c_pol(&DEGEN), 0.0);
        assert!(close(c_pol(&[&[0.0], &[1.0]]), 1.0));
    }

    #[test]
    fn dls_examples() {
        assert!(close(c_dls(&T, None), 1.0 / 3.0));
        assert!(c_dls(&DEGEN, None) < 1e-8);
        assert!(close(c_dls(&[&[0.0], &[1.0]], None), 0.5));
    }

    #[test]
    fn dls_anchored_restricts_flats() {
        // lines through the origin; best is the diagonal, residuals 1/2 each
        let a = c_dls(&T, Some(&[0.0, 0.0]));
        assert!(close(a * a, (0.5 + 0.5) / 3.0));
        assert!(a >= c_dls(&T, None));
    }

    #[test]
    fn ht_examples() {
        // heights: 1/sqrt2 at the origin, 1 at the other two
        assert!(close(c_ht(&T), 1.0 / 2f64.sqrt()));
        assert!(c_ht(&DEGEN) < 1e-12);
        assert!(close(c_ht(&[&[0.0, 1.0], &[0.0, 4.0]]), 3.0));
    }

    #[test]
    fn curvature_examples() {
        assert!(close(curvature_vol(&T), 0.25));
        assert_eq!(curvature_vol(&DEGEN), 0.0);
        let t = 3.0;
        let scaled: Vec<Vec<f64>> = T
            .iter()
            .map(|p| p.iter().map(|x| x * t).collect())
            .collect();
        let refs: Vec<&[f64]> = scaled.iter().map(Vec::as_slice).collect();
        // exponent d+1-(d+1)^2 = -2
        assert!(close(curvature_vol(&refs), 0.25 * t.powi(-2)));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("vol-mu".parse::<GcnKind>().unwrap(), GcnKind::VolMu);
        assert_eq!(
            "curvature_vol".parse::<GcnKind>().unwrap(),
            GcnKind::CurvatureVol
        );
        assert_eq!("DLS".parse::<GcnKind>().unwrap(), GcnKind::Dls);
        assert!("foo".parse::<GcnKind>().is_err());
    }
}
