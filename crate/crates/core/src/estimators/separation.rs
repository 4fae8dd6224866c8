//! Certificates of d-separation and a deterministic search for them.
//!
//! A certificate is a family of atom-index sets together with the volume
//! floor `omega` and mass floor `epsilon` it achieves. Every certificate
//! produced or accepted here has been checked by enumerating the full
//! product of its sets.

use serde::{Deserialize, Serialize};

use super::engine::{check_cap, for_each_combination, for_each_product, product_size, DEFAULT_CAP};
use super::moments::volume_moment;
use crate::error::{GcnError, Result};
use crate::linalg::dist;
use crate::measure::DiscreteMeasure;
use crate::simplex;

/// Default number of greedy set-growth steps.
pub const DEFAULT_SEARCH_BUDGET: usize = 16;

/// Growth keeps `omega >= GROWTH_FLOOR * omega_singleton`.
pub const GROWTH_FLOOR: f64 = 0.5;

/// Certificates with `omega` at or below this are rejected.
pub const OMEGA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "flavor")]
pub enum SeparationFlavor {
    /// `d+1` sets; `M_d(X) >= omega * diam^d` on their product.
    Plain,
    /// `d` sets with `x_cm` as the extra vertex.
    Central,
    /// `d+2` sets; every d-face of the product simplices is separated and
    /// each `V_i` is buffered by `tau * diam` inside `U_i`.
    SimplexWrt { tau: f64 },
    /// `d` sets; `M_d^2((x_cm, X)) >= omega * int M_d^2`.
    Robust,
}

impl SeparationFlavor {
    /// Number of sets (free vertices) for intrinsic dimension `d`.
    pub fn arity(&self, d: usize) -> usize {
        match self {
            SeparationFlavor::Plain => d + 1,
            SeparationFlavor::Central | SeparationFlavor::Robust => d,
            SeparationFlavor::SimplexWrt { .. } => d + 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SeparationFlavor::Plain => "plain",
            SeparationFlavor::Central => "central",
            SeparationFlavor::SimplexWrt { .. } => "simplex_wrt",
            SeparationFlavor::Robust => "robust",
        }
    }

    /// Quantity maximized by the search.
    fn objective(&self, omega: f64, epsilon: f64, arity: usize) -> f64 {
        let mass = epsilon.powi(arity as i32);
        match self {
            SeparationFlavor::Robust => omega * mass,
            _ => omega * omega * mass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationCertificate {
    pub flavor: SeparationFlavor,
    pub d: usize,
    /// The sets `V_i`.
    pub sets: Vec<Vec<usize>>,
    /// The buffered sets `U_i` (simplex flavor only).
    pub outer_sets: Option<Vec<Vec<usize>>>,
    pub omega: f64,
    pub epsilon: f64,
    pub tau: Option<f64>,
}

/// Evaluates the flavor's volume ratio on tuples of atom indices.
struct Geometry<'a> {
    mu: &'a DiscreteMeasure,
    d: usize,
    flavor: SeparationFlavor,
    x_cm: Vec<f64>,
    diam_pow: f64,
    moment_d: f64,
}

impl<'a> Geometry<'a> {
    fn new(mu: &'a DiscreteMeasure, d: usize, flavor: SeparationFlavor, cap: f64) -> Result<Self> {
        if let SeparationFlavor::SimplexWrt { tau } = flavor {
            if !(tau >= 0.0) {
                return Err(GcnError::InvalidArgument(format!(
                    "tau must be >= 0, got {tau}"
                )));
            }
        }
        let moment_d = if flavor == SeparationFlavor::Robust {
            volume_moment(mu, d, cap)?
        } else {
            1.0
        };
        Ok(Self {
            mu,
            d,
            flavor,
            x_cm: mu.center_of_mass(),
            diam_pow: mu.diameter().powi(d as i32),
            moment_d,
        })
    }

    fn degenerate(&self) -> bool {
        !(self.diam_pow > 0.0) || !(self.moment_d > 0.0)
    }

    fn ratio(&self, idx: &[usize]) -> f64 {
        let mut verts: Vec<&[f64]> = Vec::with_capacity(idx.len() + 1);
        match self.flavor {
            SeparationFlavor::Plain => {
                verts.extend(idx.iter().map(|&i| self.mu.atom(i)));
                simplex::volume(&verts) / self.diam_pow
            }
            SeparationFlavor::Central => {
                verts.push(&self.x_cm);
                verts.extend(idx.iter().map(|&i| self.mu.atom(i)));
                simplex::volume(&verts) / self.diam_pow
            }
            SeparationFlavor::Robust => {
                verts.push(&self.x_cm);
                verts.extend(idx.iter().map(|&i| self.mu.atom(i)));
                let m = simplex::volume(&verts);
                m * m / self.moment_d
            }
            SeparationFlavor::SimplexWrt { .. } => {
                (0..idx.len())
                    .map(|skip| {
                        verts.clear();
                        verts.extend(
                            idx.iter()
                                .enumerate()
                                .filter(|&(j, _)| j != skip)
                                .map(|(_, &i)| self.mu.atom(i)),
                        );
                        simplex::volume(&verts)
                    })
                    .fold(f64::INFINITY, f64::min)
                    / self.diam_pow
            }
        }
    }

    /// `U_i`: `V_i` plus every atom closer than `tau * diam` to it.
    fn outer(&self, sets: &[Vec<usize>]) -> Option<Vec<Vec<usize>>> {
        let SeparationFlavor::SimplexWrt { tau } = self.flavor else {
            return None;
        };
        let reach = tau * self.mu.diameter();
        Some(
            sets.iter()
                .map(|v| {
                    (0..self.mu.len())
                        .filter(|&y| {
                            v.contains(&y)
                                || v.iter()
                                    .any(|&x| dist(self.mu.atom(x), self.mu.atom(y)) < reach)
                        })
                        .collect()
                })
                .collect(),
        )
    }

    /// Minimal ratio over the product; stops once it drops below `floor`.
    fn omega(&self, sets: &[Vec<usize>], floor: f64) -> f64 {
        let outer = self.outer(sets);
        let product = outer.as_deref().unwrap_or(sets);
        let mut omega = f64::INFINITY;
        for_each_product(product, |t| {
            omega = omega.min(self.ratio(t));
            omega >= floor
        });
        omega
    }

    fn epsilon(&self, sets: &[Vec<usize>]) -> f64 {
        sets.iter().map(|s| self.mu.mass_of(s)).fold(1.0, f64::min)
    }

    fn certificate(&self, sets: Vec<Vec<usize>>, omega: f64) -> SeparationCertificate {
        SeparationCertificate {
            flavor: self.flavor,
            d: self.d,
            outer_sets: self.outer(&sets),
            epsilon: self.epsilon(&sets),
            omega,
            tau: match self.flavor {
                SeparationFlavor::SimplexWrt { tau } => Some(tau),
                _ => None,
            },
            sets,
        }
    }
}

impl SeparationCertificate {
    /// Builds a certificate from given sets, computing the best `omega` and
    /// `epsilon` they support.
    pub fn from_sets(
        mu: &DiscreteMeasure,
        d: usize,
        flavor: SeparationFlavor,
        sets: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let arity = flavor.arity(d);
        if sets.len() != arity {
            return Err(GcnError::InvalidArgument(format!(
                "{} separation in dimension {d} needs {arity} sets, got {}",
                flavor.name(),
                sets.len()
            )));
        }
        for &i in sets.iter().flatten() {
            if i >= mu.len() {
                return Err(GcnError::IndexOutOfRange {
                    index: i,
                    len: mu.len(),
                });
            }
        }
        if sets.iter().any(Vec::is_empty) {
            return Err(GcnError::InvalidArgument(
                "separation sets must be nonempty".into(),
            ));
        }
        let geo = Geometry::new(mu, d, flavor, DEFAULT_CAP)?;
        if geo.degenerate() {
            return Err(GcnError::DegenerateMeasure(
                "measure has zero diameter".into(),
            ));
        }
        let outer = geo.outer(&sets);
        let size = product_size(outer.as_deref().unwrap_or(&sets));
        if size > DEFAULT_CAP {
            return Err(GcnError::CapExceeded {
                required: size,
                cap: DEFAULT_CAP,
            });
        }
        let omega = geo.omega(&sets, f64::NEG_INFINITY);
        if !(omega > OMEGA_FLOOR) {
            return Err(GcnError::InvalidArgument(format!(
                "sets do not support separated simplices (omega = {omega:e})"
            )));
        }
        Ok(geo.certificate(sets, omega))
    }

    /// Re-checks the certificate against `mu` by full enumeration.
    pub fn verify(&self, mu: &DiscreteMeasure) -> bool {
        let Ok(geo) = Geometry::new(mu, self.d, self.flavor, DEFAULT_CAP) else {
            return false;
        };
        if geo.degenerate() || self.sets.len() != self.flavor.arity(self.d) {
            return false;
        }
        if self.sets.iter().flatten().any(|&i| i >= mu.len()) {
            return false;
        }
        let slack = 1.0 - 1e-12;
        geo.omega(&self.sets, self.omega * slack) >= self.omega * slack
            && geo.epsilon(&self.sets) >= self.epsilon * slack
    }

    /// `omega^2 * epsilon^k`, the factor in the denominator of upper bounds.
    pub fn strength(&self, k: usize) -> f64 {
        self.omega * self.omega * self.epsilon.powi(k as i32)
    }
}

/// Searches for a certificate: the best singleton tuple by volume ratio
/// (ties to the lexicographically first), then up to `budget` greedy steps
/// that each add the one atom to one set that most improves the flavor's
/// objective while keeping `omega` above half its singleton value.
///
/// Returns `None` when no tuple has a positive volume ratio.
pub fn certify_separation(
    mu: &DiscreteMeasure,
    d: usize,
    flavor: SeparationFlavor,
    budget: usize,
    cap: f64,
) -> Result<Option<SeparationCertificate>> {
    let arity = flavor.arity(d);
    let geo = Geometry::new(mu, d, flavor, cap)?;
    if geo.degenerate() || arity > mu.len() {
        return Ok(None);
    }
    check_cap(mu.len(), arity, cap)?;

    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_combination(mu.len(), arity, |t| {
        let singles: Vec<Vec<usize>> = t.iter().map(|&i| vec![i]).collect();
        let r = geo.omega(&singles, f64::NEG_INFINITY);
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, t.to_vec()));
        }
    });
    let Some((omega0, tuple)) = best else {
        return Ok(None);
    };
    if !(omega0 > OMEGA_FLOOR) {
        return Ok(None);
    }

    let mut sets: Vec<Vec<usize>> = tuple.iter().map(|&i| vec![i]).collect();
    let mut omega = omega0;
    let mut score = flavor.objective(omega, geo.epsilon(&sets), arity);
    let floor = GROWTH_FLOOR * omega0;
    for _ in 0..budget {
        let mut step: Option<(f64, f64, usize, usize)> = None;
        for i in 0..arity {
            for a in 0..mu.len() {
                if sets[i].contains(&a) {
                    continue;
                }
                let mut trial = sets.clone();
                trial[i].push(a);
                trial[i].sort_unstable();
                if product_size(geo.outer(&trial).as_deref().unwrap_or(&trial)) > cap {
                    continue;
                }
                let w = geo.omega(&trial, floor);
                if w < floor {
                    continue;
                }
                let s = flavor.objective(w, geo.epsilon(&trial), arity);
                let threshold = step.map_or(score, |(b, ..)| b);
                if s > threshold {
                    step = Some((s, w, i, a));
                }
            }
        }
        let Some((s, w, i, a)) = step else { break };
        sets[i].push(a);
        sets[i].sort_unstable();
        omega = w;
        score = s;
    }
    Ok(Some(geo.certificate(sets, omega)))
}
