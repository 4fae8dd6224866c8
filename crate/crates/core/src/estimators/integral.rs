//! Integrals of p-th powers of GCNs over product measures.

use serde::{Deserialize, Serialize};

use super::engine::{check_cap, monte_carlo, sum_combinations, WeightedSampler, DEFAULT_CAP};
use super::moments::volume_moment;
use crate::error::{GcnError, Result};
use crate::gcn::GcnKind;
use crate::linalg::AffineFlat;
use crate::measure::DiscreteMeasure;
use crate::simplex::{self, SPAN_RANK_TOL};

/// Which vertices of the integrated simplex are pinned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// Integrate over `(d+2)`-tuples of atoms.
    None,
    /// `(x_cm, x_1, ..., x_{d+1})`: integrate over `(d+1)`-tuples.
    XcmPlusD1,
    /// Deshpande-type GCN on `(x_cm, x_1, ..., x_d)`: integrate
    /// `M_d^2 * int dist^2(y, L) dmu(y) / int M_d^2` over `d`-tuples.
    XcmPlusD,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Mode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

/// What to integrate and how.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralSpec {
    pub kind: GcnKind,
    pub d: usize,
    /// Exponent applied to the GCN (2 for the least-squares setting).
    pub p: f64,
    pub anchor: Anchor,
    /// Restrict to simplices with `min(X) >= tau * diam(mu)`.
    pub tau: Option<f64>,
    pub mode: Mode,
    /// Maximal `N^arity` for exact enumeration.
    pub cap: f64,
}

impl IntegralSpec {
    pub fn new(kind: GcnKind, d: usize) -> Self {
        Self {
            kind,
            d,
            p: 2.0,
            anchor: Anchor::None,
            tau: None,
            mode: Mode::Exact,
            cap: DEFAULT_CAP,
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_anchor(mut self, anchor: Anchor) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = cap;
        self
    }

    /// Number of free vertices drawn from the measure.
    pub fn arity(&self) -> usize {
        match self.anchor {
            Anchor::None => self.d + 2,
            Anchor::XcmPlusD1 => self.d + 1,
            Anchor::XcmPlusD => self.d,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p > 0.0) || !self.p.is_finite() {
            return Err(GcnError::InvalidArgument(format!(
                "exponent p must be positive and finite, got {}",
                self.p
            )));
        }
        if let Some(t) = self.tau {
            if !(t >= 0.0) {
                return Err(GcnError::InvalidArgument(format!(
                    "tau must be >= 0, got {t}"
                )));
            }
        }
        if self.anchor == Anchor::XcmPlusD && self.kind != GcnKind::Vol {
            return Err(GcnError::InvalidArgument(
                "the d-vertex anchored integral is only defined for the volume family (kind=vol)"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Value of an integral, with a standard error for Monte-Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub std_error: Option<f64>,
    pub evaluations: u64,
}

/// Evaluates one tuple of atom indices; shared by the exact and
/// Monte-Carlo paths.
struct TupleEvaluator<'a> {
    mu: &'a DiscreteMeasure,
    spec: IntegralSpec,
    x_cm: Vec<f64>,
    diam_mu: f64,
    min_edge_floor: Option<f64>,
    /// `int M_d^2` over d-tuples anchored at x_cm (XcmPlusD only).
    moment_d: f64,
}

impl<'a> TupleEvaluator<'a> {
    fn new(mu: &'a DiscreteMeasure, spec: IntegralSpec) -> Result<Self> {
        spec.validate()?;
        let diam_mu = mu.diameter();
        let moment_d = if spec.anchor == Anchor::XcmPlusD {
            let m = volume_moment(mu, spec.d, spec.cap)?;
            if m <= degenerate_floor(diam_mu, spec.d) {
                return Err(GcnError::DegenerateMeasure(format!(
                    "int M_{}^2 vanishes: support lies in a {}-flat",
                    spec.d,
                    spec.d as i64 - 1
                )));
            }
            m
        } else {
            1.0
        };
        Ok(Self {
            mu,
            spec,
            x_cm: mu.center_of_mass(),
            diam_mu,
            min_edge_floor: spec.tau.map(|t| t * diam_mu),
            moment_d,
        })
    }

    /// `c(X)^p` for the tuple (without the product weight).
    fn value(&self, idx: &[usize]) -> f64 {
        let mut verts: Vec<&[f64]> = Vec::with_capacity(idx.len() + 1);
        if self.spec.anchor != Anchor::None {
            verts.push(&self.x_cm);
        }
        verts.extend(idx.iter().map(|&i| self.mu.atom(i)));
        if let Some(floor) = self.min_edge_floor {
            if verts.len() > 1 && simplex::min_edge(&verts) < floor {
                return 0.0;
            }
        }
        let c = match self.spec.anchor {
            Anchor::XcmPlusD => {
                let m = simplex::volume(&verts);
                if m == 0.0 {
                    return 0.0;
                }
                let dirs: Vec<Vec<f64>> = verts[1..]
                    .iter()
                    .map(|x| x.iter().zip(&self.x_cm).map(|(a, b)| a - b).collect())
                    .collect();
                let largest = dirs
                    .iter()
                    .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
                    .fold(0.0, f64::max);
                let flat = AffineFlat::spanned(self.x_cm.clone(), &dirs, SPAN_RANK_TOL * largest);
                let residual: f64 = self
                    .mu
                    .atoms()
                    .iter()
                    .zip(self.mu.weights())
                    .map(|(y, w)| w * flat.dist2_unchecked(y))
                    .sum();
                return (m * m * residual / self.moment_d).powf(self.spec.p / 2.0);
            }
            _ => {
                if self.spec.kind == GcnKind::VolMu && self.diam_mu == 0.0 {
                    return 0.0;
                }
                self.spec.kind.eval(&verts, self.diam_mu)
            }
        };
        if c == 0.0 {
            0.0
        } else if self.spec.p == 2.0 {
            c * c
        } else {
            c.powf(self.spec.p)
        }
    }
}

pub(crate) fn degenerate_floor(diam: f64, d: usize) -> f64 {
    1e-13 * diam.powi(2 * d as i32)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Exact `int c^p dmu^arity` by enumeration.
///
/// All GCNs are symmetric in their free vertices and vanish when two of them
/// coincide, so the ordered sum equals `arity!` times the sum over strictly
/// increasing index tuples. The cap still applies to `N^arity`.
pub fn integral_exact(mu: &DiscreteMeasure, spec: &IntegralSpec) -> Result<IntegralEstimate> {
    let arity = spec.arity();
    check_cap(mu.len(), arity, spec.cap)?;
    let eval = TupleEvaluator::new(mu, *spec)?;
    let w = mu.weights();
    let sum = sum_combinations(mu.len(), arity, |idx| {
        let weight: f64 = idx.iter().map(|&i| w[i]).product();
        weight * eval.value(idx)
    });
    let evaluations = binomial(mu.len(), arity);
    Ok(IntegralEstimate {
        value: factorial(arity) * sum,
        std_error: None,
        evaluations,
    })
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Monte-Carlo estimate of the same integral with its standard error.
pub fn integral_mc(mu: &DiscreteMeasure, spec: &IntegralSpec) -> Result<IntegralEstimate> {
    let Mode::MonteCarlo { samples, seed } = spec.mode else {
        return Err(GcnError::InvalidArgument(
            "integral_mc needs mode=monte_carlo".into(),
        ));
    };
    if samples == 0 {
        return Err(GcnError::InvalidArgument("samples must be >= 1".into()));
    }
    let eval = TupleEvaluator::new(mu, *spec)?;
    let sampler = WeightedSampler::new(mu.weights());
    let stats = monte_carlo(&sampler, spec.arity(), samples, seed, |idx| eval.value(idx));
    Ok(IntegralEstimate {
        value: stats.mean,
        std_error: Some(stats.std_error()),
        evaluations: samples,
    })
}

/// Dispatches on `spec.mode`.
pub fn integrate(mu: &DiscreteMeasure, spec: &IntegralSpec) -> Result<IntegralEstimate> {
    match spec.mode {
        Mode::Exact => integral_exact(mu, spec),
        Mode::MonteCarlo { .. } => integral_mc(mu, spec),
    }
}
