//! Finitely supported probability measures and their least-squares flats.

use serde::{Deserialize, Serialize};

use crate::error::{GcnError, Result};
use crate::linalg::{dist, weighted_spectrum, AffineFlat, Spectrum};

/// Tolerance on `sum(weights) = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;

/// Relative spectral gap below which the LS flat is reported as non-unique.
pub const UNIQUE_GAP_TOL: f64 = 1e-10;

/// Atoms with strictly positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// Center of mass, spectrum and total variance of a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub x_cm: Vec<f64>,
    pub spectrum: Spectrum,
    pub total_variance: f64,
}

/// Result of a least-squares flat fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsFit {
    pub flat: AffineFlat,
    /// `e_2(mu, d)`, the root of the minimal mean squared distance.
    pub e2: f64,
    /// False when `sigma_d` and `sigma_{d+1}` are numerically tied.
    pub unique: bool,
}

impl LsFit {
    pub fn e2_sq(&self) -> f64 {
        self.e2 * self.e2
    }
}

/// Output of [`DiscreteMeasure::regularity_probe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityProbe {
    /// `max_{x, t} mu(B(x, t)) / t^gamma` over atoms and probed radii.
    pub c_est: f64,
    /// The supremum is not attained at the finest probed radius, i.e. the
    /// ratio has stopped growing within the grid.
    pub satisfied_upper: bool,
    /// `(t, max_x mu(B(x,t)) / t^gamma)` for each probed radius.
    pub per_radius: Vec<(f64, f64)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(GcnError::InvalidMeasure("no atoms".into()));
        }
        if atoms.len() != weights.len() {
            return Err(GcnError::InvalidMeasure(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let dim = atoms[0].len();
        if dim == 0 {
            return Err(GcnError::InvalidMeasure("zero-dimensional atoms".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.len() != dim {
                return Err(GcnError::DimensionMismatch {
                    expected: dim,
                    got: a.len(),
                });
            }
            if a.iter().any(|x| !x.is_finite()) {
                return Err(GcnError::InvalidMeasure(format!("atom {i} is not finite")));
            }
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(GcnError::InvalidWeights(format!(
                "weight {i} is {} (must be positive)",
                weights[i]
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(GcnError::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms, weights })
    }

    /// Uniform weights `1/N`.
    pub fn uniform(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let n = atoms.len();
        Self::new(atoms, vec![1.0 / n.max(1) as f64; n])
    }

    /// Positive weights rescaled to sum to one.
    pub fn normalized(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(GcnError::InvalidWeights(format!("weights sum to {total}")));
        }
        Self::new(atoms, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn center_of_mass(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            c.iter_mut().zip(a).for_each(|(s, x)| *s += w * x);
        }
        c
    }

    /// Maximal distance between two atoms.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                best = best.max(dist(&self.atoms[i], &self.atoms[j]));
            }
        }
        best
    }

    /// `mu(S)` for a set of atom indices (duplicates counted once).
    pub fn mass_of(&self, indices: &[usize]) -> f64 {
        let mut seen = vec![false; self.len()];
        let mut m = 0.0;
        for &i in indices {
            if !std::mem::replace(&mut seen[i], true) {
                m += self.weights[i];
            }
        }
        m
    }

    pub fn spectral_summary(&self) -> Result<SpectralSummary> {
        let x_cm = self.center_of_mass();
        let spectrum = weighted_spectrum(&self.atoms, &self.weights, &x_cm)?;
        let total_variance = self
            .atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * dist(a, &x_cm).powi(2))
            .sum();
        Ok(SpectralSummary {
            x_cm,
            spectrum,
            total_variance,
        })
    }

    /// Least-squares d-flat and its error `e_2(mu, d)`.
    ///
    /// The flat passes through the center of mass and is spanned by the top
    /// `d` right vectors of the data-to-features operator. With `anchored =
    /// Some(y)` the minimization runs over flats through `y` instead (for
    /// `y = 0` these are the linear subspaces).
    pub fn ls_flat(&self, d: usize, anchored: Option<&[f64]>) -> Result<LsFit> {
        let dim = self.dim();
        if d > dim {
            return Err(GcnError::InvalidArgument(format!(
                "flat dimension {d} exceeds ambient dimension {dim}"
            )));
        }
        let center = match anchored {
            Some(y) => {
                if y.len() != dim {
                    return Err(GcnError::DimensionMismatch {
                        expected: dim,
                        got: y.len(),
                    });
                }
                y.to_vec()
            }
            None => self.center_of_mass(),
        };
        let spectrum = weighted_spectrum(&self.atoms, &self.weights, &center)?;
        let e2 = spectrum.tail(d).sqrt();
        let unique = if d == 0 || d >= dim {
            true
        } else {
            spectrum.values[d - 1] - spectrum.values[d] > UNIQUE_GAP_TOL * spectrum.values[0]
        };
        let basis = spectrum.vectors[..d].to_vec();
        Ok(LsFit {
            flat: AffineFlat::new(center, basis)?,
            e2,
            unique,
        })
    }

    /// Empirical upper-regularity constant on a radius grid.
    pub fn regularity_probe(&self, gamma: f64, radii: &[f64]) -> Result<RegularityProbe> {
        if radii.is_empty() {
            return Err(GcnError::InvalidArgument("no radii to probe".into()));
        }
        if !(gamma > 0.0) {
            return Err(GcnError::InvalidArgument(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if let Some(t) = radii.iter().find(|t| !(**t > 0.0)) {
            return Err(GcnError::InvalidArgument(format!(
                "radius {t} is not positive"
            )));
        }
        let mut per_radius = Vec::with_capacity(radii.len());
        for &t in radii {
            let mut best = 0.0f64;
            for x in &self.atoms {
                let mass: f64 = self
                    .atoms
                    .iter()
                    .zip(&self.weights)
                    .filter(|(y, _)| dist(x, y) <= t)
                    .map(|(_, w)| w)
                    .sum();
                best = best.max(mass / t.powf(gamma));
            }
            per_radius.push((t, best));
        }
        let c_est = per_radius.iter().map(|p| p.1).fold(0.0, f64::max);
        let finest = per_radius
            .iter()
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|p| p.1)
            .unwrap_or(0.0);
        let coarser_max = per_radius
            .iter()
            .filter(|p| p.0 > radii.iter().cloned().fold(f64::INFINITY, f64::min))
            .map(|p| p.1)
            .fold(0.0, f64::max);
        Ok(RegularityProbe {
            c_est,
            satisfied_upper: finest <= coarser_max,
            per_radius,
        })
    }

    /// The default probe grid `diam * 2^-k`, k = 1..8.
    pub fn default_radii(&self) -> Vec<f64> {
        let diam = self.diameter();
        (1..=8).map(|k| diam * 0.5f64.powi(k)).collect()
    }
}

/// `e_2^2` of the uniform empirical measure on `samples`.
pub fn empirical_ls_error(samples: &[Vec<f64>], d: usize) -> Result<f64> {
    let mu = DiscreteMeasure::uniform(samples.to_vec())?;
    Ok(mu.ls_flat(d, None)?.e2_sq())
}
