//! Sampling experiment for the high-probability comparison between the
//! empirical LS error and the empirical integral of `c_dls^2`.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::holds;
use super::engine::{substream, unit_f64, WeightedSampler};
use super::integral::{integral_exact, IntegralSpec};
use super::separation::{certify_separation, SeparationCertificate, SeparationFlavor};
use crate::error::{GcnError, Result};
use crate::gcn::GcnKind;
use crate::measure::DiscreteMeasure;

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationConfig {
    pub d: usize,
    /// Sample size per trial.
    pub n: usize,
    pub trials: usize,
    pub delta: f64,
    pub seed: u64,
    pub search_budget: usize,
    pub cap: f64,
    /// Used instead of a searched plain certificate when given.
    pub certificate: Option<SeparationCertificate>,
}

/// Per-trial empirical quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    /// `e_2^2` of the empirical measure.
    pub e2_sq: f64,
    /// Normalized sum of `c_dls^2` over all ordered `(d+2)`-tuples of the sample.
    pub c_dls_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSummary {
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    pub delta: f64,
    pub omega: f64,
    pub epsilon: f64,
    pub e2_sq: f64,
    pub int_c_dls_sq: f64,
    pub kappa: f64,
    /// `(1+delta)/(1-delta) / (omega^2 eps^{d+1})`
    pub constant_two_sided: f64,
    /// `1 - 2 exp(-2 N kappa^2)`
    pub floor_two_sided: f64,
    /// `1 / (omega^2 (eps-delta)^{d+1})`, only for `delta < eps`.
    pub constant_mass: Option<f64>,
    /// `1 - (d+1) exp(-2 N delta^2)`, only for `delta < eps`.
    pub floor_mass: Option<f64>,
    /// Fraction of trials with `c_dls^2 <= e_2^2` (empirical).
    pub left_frequency: f64,
    pub two_sided_frequency: f64,
    pub mass_frequency: Option<f64>,
    pub trial_values: Vec<Trial>,
}

impl ConcentrationSummary {
    /// Every trial satisfied the deterministic left inequality and both
    /// empirical frequencies reach their floors.
    pub fn consistent(&self) -> bool {
        self.left_frequency == 1.0
            && self.two_sided_frequency >= self.floor_two_sided
            && match (self.mass_frequency, self.floor_mass) {
                (Some(f), Some(floor)) => f >= floor,
                _ => true,
            }
    }
}

/// Draws `n` atoms and collapses them into the empirical measure.
fn empirical(
    mu: &DiscreteMeasure,
    sampler: &WeightedSampler,
    n: usize,
    rng: &mut impl RngCore,
) -> Result<DiscreteMeasure> {
    let mut counts = vec![0usize; mu.len()];
    for _ in 0..n {
        counts[sampler.sample(unit_f64(rng.next_u64()))] += 1;
    }
    let (atoms, weights): (Vec<Vec<f64>>, Vec<f64>) = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (mu.atom(i).to_vec(), c as f64 / n as f64))
        .unzip();
    DiscreteMeasure::normalized(atoms, weights)
}

pub fn concentration_experiment(
    mu: &DiscreteMeasure,
    cfg: &ConcentrationConfig,
) -> Result<ConcentrationSummary> {
    if cfg.trials == 0 || cfg.n == 0 {
        return Err(GcnError::InvalidArgument(
            "trials and sample size must be >= 1".into(),
        ));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(GcnError::InvalidArgument(format!(
            "delta must lie in (0, 1), got {}",
            cfg.delta
        )));
    }
    let d = cfg.d;
    let cert = match &cfg.certificate {
        Some(c) if c.flavor == SeparationFlavor::Plain && c.d == d && c.verify(mu) => c.clone(),
        Some(_) => {
            return Err(GcnError::InvalidArgument(
                "certificate must be a valid plain certificate for this dimension".into(),
            ))
        }
        None => certify_separation(mu, d, SeparationFlavor::Plain, cfg.search_budget, cfg.cap)?
            .ok_or_else(|| GcnError::DegenerateMeasure(format!("measure is not {d}-separated")))?,
    };
    let spec = IntegralSpec::new(GcnKind::Dls, d).with_cap(cfg.cap);
    let int_dls = integral_exact(mu, &spec)?.value;
    let e2_sq = mu.ls_flat(d, None)?.e2_sq();
    let diam = mu.diameter();
    let nf = cfg.n as f64;
    let k = (d + 1) as i32;
    let s = cert.omega * cert.omega;

    let kappa = cfg.delta / ((d + 2) as f64 * diam * diam) * int_dls;
    let constant_two_sided = (1.0 + cfg.delta) / (1.0 - cfg.delta) / (s * cert.epsilon.powi(k));
    let floor_two_sided = 1.0 - 2.0 * (-2.0 * nf * kappa * kappa).exp();
    let mass_applies = cfg.delta < cert.epsilon;
    let constant_mass = mass_applies.then(|| 1.0 / (s * (cert.epsilon - cfg.delta).powi(k)));
    let floor_mass =
        mass_applies.then(|| 1.0 - (d + 1) as f64 * (-2.0 * nf * cfg.delta * cfg.delta).exp());

    let sampler = WeightedSampler::new(mu.weights());
    let trial_values: Vec<Trial> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(cfg.seed, t as u64);
            let emp = empirical(mu, &sampler, cfg.n, &mut rng)?;
            let e2 = if d > emp.dim() {
                0.0
            } else {
                emp.ls_flat(d, None)?.e2_sq()
            };
            Ok(Trial {
                e2_sq: e2,
                c_dls_sq: integral_exact(&emp, &spec)?.value,
            })
        })
        .collect::<Result<_>>()?;

    let scale = diam * diam;
    let frac = |pred: &dyn Fn(&Trial) -> bool| {
        trial_values.iter().filter(|t| pred(t)).count() as f64 / cfg.trials as f64
    };
    let left = |t: &Trial| holds(t.c_dls_sq, t.e2_sq, scale);
    let left_frequency = frac(&left);
    let two_sided_frequency =
        frac(&|t| left(t) && holds(t.e2_sq, constant_two_sided * t.c_dls_sq, scale));
    let mass_frequency =
        constant_mass.map(|c| frac(&|t| left(t) && holds(t.e2_sq, c * t.c_dls_sq, scale)));

    Ok(ConcentrationSummary {
        d,
        n: cfg.n,
        trials: cfg.trials,
        delta: cfg.delta,
        omega: cert.omega,
        epsilon: cert.epsilon,
        e2_sq,
        int_c_dls_sq: int_dls,
        kappa,
        constant_two_sided,
        floor_two_sided,
        constant_mass,
        floor_mass,
        left_frequency,
        two_sided_frequency,
        mass_frequency,
        trial_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::engine::DEFAULT_CAP;
    use crate::fixtures::t3;

    fn config(trials: usize, delta: f64) -> ConcentrationConfig {
        ConcentrationConfig {
            d: 1,
            n: 200,
            trials,
            delta,
            seed: 11,
            search_budget: 16,
            cap: DEFAULT_CAP,
            certificate: None,
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(concentration_experiment(&t3(), &config(0, 0.5)).is_err());
        assert!(concentration_experiment(&t3(), &config(5, 1.0)).is_err());
        assert!(concentration_experiment(&t3(), &config(5, 0.0)).is_err());
    }

    #[test]
    fn t3_small_run() {
        let s = concentration_experiment(&t3(), &config(40, 0.5)).unwrap();
        assert_eq!(s.left_frequency, 1.0);
        assert!(s.consistent());
        assert!(s.mass_frequency.is_none());
        let again = concentration_experiment(&t3(), &config(40, 0.5)).unwrap();
        assert_eq!(s, again);
        let s = concentration_experiment(&t3(), &config(20, 0.1)).unwrap();
        assert!(s.mass_frequency.is_some());
    }
}
