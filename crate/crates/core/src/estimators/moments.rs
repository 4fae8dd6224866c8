//! Volume moments around the center of mass and their symmetric-polynomial
//! counterparts.

use serde::{Deserialize, Serialize};

use super::engine::{check_cap, sum_ordered};
use super::integral::degenerate_floor;
use crate::error::{GcnError, Result};
use crate::linalg::elementary_symmetric;
use crate::measure::DiscreteMeasure;
use crate::simplex;

/// `int M_m((x_cm, x_1..x_m))^2 dmu^m` by enumeration over ordered m-tuples.
///
/// `m = 0` gives 1 (the empty product); `m > D` gives 0.
pub fn volume_moment(mu: &DiscreteMeasure, m: usize, cap: f64) -> Result<f64> {
    if m == 0 {
        return Ok(1.0);
    }
    if m > mu.dim() {
        return Ok(0.0);
    }
    check_cap(mu.len(), m, cap)?;
    let x_cm = mu.center_of_mass();
    let w = mu.weights();
    Ok(sum_ordered(mu.len(), m, |idx| {
        let weight: f64 = idx.iter().map(|&i| w[i]).product();
        if weight == 0.0 {
            return 0.0;
        }
        let mut verts: Vec<&[f64]> = Vec::with_capacity(m + 1);
        verts.push(&x_cm);
        verts.extend(idx.iter().map(|&i| mu.atom(i)));
        let v = simplex::volume(&verts);
        weight * v * v
    }))
}

/// Both sides of the moment / symmetric-polynomial identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentIdentity {
    pub m: usize,
    pub lhs: f64,
    /// `e_m(sigma^2)`
    pub rhs_plain: f64,
    /// `m! * e_m(sigma^2)`
    pub rhs_corrected: f64,
    /// `lhs / e_m(sigma^2)`; `None` when `e_m` vanishes.
    pub kappa: Option<f64>,
}

pub fn moment_identity_check(mu: &DiscreteMeasure, m: usize, cap: f64) -> Result<MomentIdentity> {
    let lhs = volume_moment(mu, m, cap)?;
    let sigma_sq = mu.spectral_summary()?.spectrum.squared();
    let e_m = elementary_symmetric(&sigma_sq, m);
    let fact: f64 = (1..=m).map(|i| i as f64).product();
    let scale = mu.diameter().powi(2 * m as i32);
    let kappa = (e_m > 1e-14 * scale.max(f64::MIN_POSITIVE)).then(|| lhs / e_m);
    Ok(MomentIdentity {
        m,
        lhs,
        rhs_plain: e_m,
        rhs_corrected: fact * e_m,
        kappa,
    })
}

/// `int c_Dsh^2 dmu^d = moment(d+1) / moment(d)`.
pub fn c_dsh_integral(mu: &DiscreteMeasure, d: usize, cap: f64) -> Result<f64> {
    let denom = volume_moment(mu, d, cap)?;
    if denom <= degenerate_floor(mu.diameter(), d) {
        return Err(GcnError::DegenerateMeasure(format!(
            "int M_{d}^2 around the center of mass vanishes; support lies in a lower-dimensional flat"
        )));
    }
    Ok(volume_moment(mu, d + 1, cap)? / denom)
}

/// `(e_{d+1}(sigma^2) / e_d(sigma^2), sum_{j>d} sigma_j^2)` for singular
/// values `sigma` in nonincreasing order.
pub fn sym_tail_ratio(sigma: &[f64], d: usize) -> Result<(f64, f64)> {
    let sq: Vec<f64> = sigma.iter().map(|s| s * s).collect();
    let e_d = elementary_symmetric(&sq, d);
    if e_d == 0.0 {
        return Err(GcnError::DegenerateMeasure(format!(
            "e_{d}(sigma^2) vanishes"
        )));
    }
    let ratio = elementary_symmetric(&sq, d + 1) / e_d;
    let tail = sq.iter().skip(d).sum();
    Ok((ratio, tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::engine::DEFAULT_CAP;
    use crate::fixtures::{collinear3, sq4, t3};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn t3_moments() {
        let mu = t3();
        assert!(close(
            volume_moment(&mu, 1, DEFAULT_CAP).unwrap(),
            4.0 / 9.0
        ));
        assert!(close(
            volume_moment(&mu, 2, DEFAULT_CAP).unwrap(),
            2.0 / 27.0
        ));
        assert_eq!(volume_moment(&mu, 3, DEFAULT_CAP).unwrap(), 0.0);
        assert_eq!(volume_moment(&mu, 0, DEFAULT_CAP).unwrap(), 1.0);
    }

    #[test]
    fn identity_needs_factorial() {
        let r = moment_identity_check(&t3(), 1, DEFAULT_CAP).unwrap();
        assert!(close(r.lhs, 4.0 / 9.0) && close(r.kappa.unwrap(), 1.0));
        let r = moment_identity_check(&t3(), 2, DEFAULT_CAP).unwrap();
        assert!(close(r.lhs, 2.0 / 27.0));
        assert!(close(r.rhs_plain, 1.0 / 27.0));
        assert!(close(r.kappa.unwrap(), 2.0));
        assert!(close(r.lhs, r.rhs_corrected));
        let r = moment_identity_check(&collinear3(), 2, DEFAULT_CAP).unwrap();
        assert!(r.lhs.abs() < 1e-15 && r.kappa.is_none());
    }

    #[test]
    fn dsh_integrals() {
        assert!(close(
            c_dsh_integral(&t3(), 1, DEFAULT_CAP).unwrap(),
            1.0 / 6.0
        ));
        assert!(close(c_dsh_integral(&sq4(), 1, DEFAULT_CAP).unwrap(), 0.5));
        assert!(c_dsh_integral(&collinear3(), 1, DEFAULT_CAP).unwrap().abs() < 1e-15);
        assert!(c_dsh_integral(&collinear3(), 2, DEFAULT_CAP).is_err());
    }

    #[test]
    fn tail_ratio_examples() {
        let (r, t) = sym_tail_ratio(&[(1.0f64 / 3.0).sqrt(), 1.0 / 3.0], 1).unwrap();
        assert!(close(r, 1.0 / 12.0) && close(t, 1.0 / 9.0));
        let (r, t) = sym_tail_ratio(&[1.0, 0.0], 1).unwrap();
        assert_eq!((r, t), (0.0, 0.0));
        let s = [0.9, 0.4, 0.1];
        let (r, t) = sym_tail_ratio(&s, 0).unwrap();
        assert!(close(r, t));
        assert!(sym_tail_ratio(&[1.0, 0.0], 2).is_err());
    }
}
