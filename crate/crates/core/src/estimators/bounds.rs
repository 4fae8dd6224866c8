//! Numerical checks of the comparison inequalities between `e_2^2(mu, d)`
//! and integrals of squared GCNs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::engine::{check_cap, for_each_combination, DEFAULT_CAP};
use super::integral::{integrate, Anchor, IntegralSpec, Mode};
use super::moments::{c_dsh_integral, sym_tail_ratio};
use super::separation::{
    certify_separation, SeparationCertificate, SeparationFlavor, DEFAULT_SEARCH_BUDGET,
};
use crate::error::{GcnError, Result};
use crate::gcn::GcnKind;
use crate::measure::DiscreteMeasure;
use crate::simplex;

/// Relative slack of every bound comparison.
pub const REL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// `e_2^2 <= int c_vol_mu^2 / (omega^2 eps^{d+1})` under d-separation.
    #[serde(rename = "main-1")]
    Main1,
    /// `int c_dls^2 <= e_2^2` for every measure.
    LowerDls,
    /// `int c_pol^2 <= C e_2^2` under upper regularity; `C` is supplied.
    PolUpper,
    /// Both inequalities for GCNs with one vertex at the center of mass.
    Anchored,
    /// Two-sided comparison with the Deshpande-type GCN.
    Deshpande,
    /// Ratio of consecutive elementary symmetric polynomials of `sigma^2`
    /// against the spectral tail.
    Singvals,
    /// Upper bound restricted to simplices with large edges.
    MainModified,
}

impl Theorem {
    pub const ALL: [Theorem; 7] = [
        Theorem::Main1,
        Theorem::LowerDls,
        Theorem::PolUpper,
        Theorem::Anchored,
        Theorem::Deshpande,
        Theorem::Singvals,
        Theorem::MainModified,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Theorem::Main1 => "main-1",
            Theorem::LowerDls => "lower-dls",
            Theorem::PolUpper => "pol-upper",
            Theorem::Anchored => "anchored",
            Theorem::Deshpande => "deshpande",
            Theorem::Singvals => "singvals",
            Theorem::MainModified => "main-modified",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Theorem {
    type Err = GcnError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Theorem::ALL
            .into_iter()
            .find(|t| t.id() == norm)
            .ok_or_else(|| GcnError::InvalidArgument(format!("unknown theorem id '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Pass,
    Fail,
    /// The hypothesis could not be established (no certificate, no
    /// constant supplied).
    NotApplicable,
}

/// A secondary inequality evaluated alongside the main one. Gating checks
/// must hold for the report to pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub gating: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub d: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub status: BoundStatus,
    pub constants: BTreeMap<String, f64>,
    pub checks: Vec<SubCheck>,
    pub certificate: Option<SeparationCertificate>,
    pub runtime_ms: f64,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.status == BoundStatus::Pass
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    /// Used instead of searching when given; must match the theorem's flavor.
    pub certificate: Option<SeparationCertificate>,
    pub search_budget: usize,
    pub cap: f64,
    /// Edge threshold for the large-edge restriction (default 0).
    pub tau: Option<f64>,
    /// Comparison constant for the polar upper bound.
    pub pol_constant: Option<f64>,
    /// How integrals of GCNs are evaluated.
    pub mode: Mode,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            certificate: None,
            search_budget: DEFAULT_SEARCH_BUDGET,
            cap: DEFAULT_CAP,
            tau: None,
            pol_constant: None,
            mode: Mode::Exact,
        }
    }
}

/// `lhs <= rhs (1 + 1e-9)`, plus an absolute allowance of `1e-15 * scale`
/// for quantities that vanish in exact arithmetic.
pub fn holds(lhs: f64, rhs: f64, scale: f64) -> bool {
    lhs <= rhs * (1.0 + REL_SLACK) + 1e-15 * scale
}

struct Builder {
    theorem: Theorem,
    d: usize,
    scale: f64,
    constants: BTreeMap<String, f64>,
    checks: Vec<SubCheck>,
    certificate: Option<SeparationCertificate>,
    start: Instant,
}

impl Builder {
    fn constant(&mut self, name: &str, value: f64) -> &mut Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    fn check(&mut self, name: &str, lhs: f64, rhs: f64, gating: bool) -> &mut Self {
        self.checks.push(SubCheck {
            name: name.to_string(),
            lhs,
            rhs,
            holds: holds(lhs, rhs, self.scale),
            gating,
        });
        self
    }

    fn finish(self, lhs: f64, rhs: f64) -> BoundReport {
        let ok = holds(lhs, rhs, self.scale) && self.checks.iter().all(|c| c.holds || !c.gating);
        self.report(
            lhs,
            rhs,
            if ok {
                BoundStatus::Pass
            } else {
                BoundStatus::Fail
            },
        )
    }

    fn not_applicable(self, lhs: f64, rhs: f64) -> BoundReport {
        self.report(lhs, rhs, BoundStatus::NotApplicable)
    }

    fn report(self, lhs: f64, rhs: f64, status: BoundStatus) -> BoundReport {
        BoundReport {
            theorem: self.theorem,
            d: self.d,
            lhs,
            rhs,
            status,
            constants: self.constants,
            checks: self.checks,
            certificate: self.certificate,
            runtime_ms: self.start.elapsed().as_secs_f64() * 1e3,
        }
    }
}

fn certificate(
    mu: &DiscreteMeasure,
    d: usize,
    flavor: SeparationFlavor,
    params: &BoundParams,
) -> Result<Option<SeparationCertificate>> {
    match &params.certificate {
        Some(c) => {
            if c.flavor != flavor || c.d != d {
                return Err(GcnError::InvalidArgument(format!(
                    "certificate is {} separation in dimension {}, expected {} in dimension {d}",
                    c.flavor.name(),
                    c.d,
                    flavor.name()
                )));
            }
            if !c.verify(mu) {
                return Err(GcnError::InvalidArgument(
                    "supplied certificate does not hold for this measure".into(),
                ));
            }
            Ok(Some(c.clone()))
        }
        None => certify_separation(mu, d, flavor, params.search_budget, params.cap),
    }
}

fn integral(mu: &DiscreteMeasure, spec: IntegralSpec, params: &BoundParams) -> Result<f64> {
    Ok(integrate(mu, &spec.with_cap(params.cap).with_mode(params.mode))?.value)
}

/// Evaluates one comparison inequality on `mu` and records every
/// intermediate quantity.
pub fn verify_bound(
    theorem: Theorem,
    mu: &DiscreteMeasure,
    d: usize,
    params: &BoundParams,
) -> Result<BoundReport> {
    let start = Instant::now();
    let diam = mu.diameter();
    let mut b = Builder {
        theorem,
        d,
        scale: diam * diam,
        constants: BTreeMap::new(),
        checks: Vec::new(),
        certificate: None,
        start,
    };
    let e2_sq = mu.ls_flat(d, None)?.e2_sq();
    b.constant("e2_sq", e2_sq).constant("diam", diam);

    match theorem {
        Theorem::LowerDls => {
            let dls = integral(mu, IntegralSpec::new(GcnKind::Dls, d), params)?;
            b.constant("int_c_dls_sq", dls);
            Ok(b.finish(dls, e2_sq))
        }
        Theorem::PolUpper => {
            let pol = integral(mu, IntegralSpec::new(GcnKind::Pol, d), params)?;
            b.constant("int_c_pol_sq", pol);
            if e2_sq > 0.0 {
                b.constant("ratio", pol / e2_sq);
            }
            match params.pol_constant {
                Some(c) => {
                    b.constant("pol_constant", c);
                    Ok(b.finish(pol, c * e2_sq))
                }
                None => Ok(b.not_applicable(pol, f64::NAN)),
            }
        }
        Theorem::Main1 => {
            let vol = integral(mu, IntegralSpec::new(GcnKind::VolMu, d), params)?;
            b.constant("int_c_vol_mu_sq", vol);
            let Some(cert) = certificate(mu, d, SeparationFlavor::Plain, params)? else {
                return Ok(b.not_applicable(e2_sq, f64::NAN));
            };
            let strength = cert.strength(d + 1);
            b.constant("omega", cert.omega)
                .constant("epsilon", cert.epsilon)
                .constant("constant", 1.0 / strength);
            b.certificate = Some(cert);
            Ok(b.finish(e2_sq, vol / strength))
        }
        Theorem::Anchored => {
            let vol = integral(
                mu,
                IntegralSpec::new(GcnKind::VolMu, d).with_anchor(Anchor::XcmPlusD1),
                params,
            )?;
            let dls = integral(
                mu,
                IntegralSpec::new(GcnKind::Dls, d).with_anchor(Anchor::XcmPlusD1),
                params,
            )?;
            b.constant("int_anchored_c_vol_mu_sq", vol)
                .constant("int_anchored_c_dls_sq", dls)
                .check("anchored_dls_lower", dls, e2_sq, true);
            let Some(cert) = certificate(mu, d, SeparationFlavor::Central, params)? else {
                return Ok(b.not_applicable(e2_sq, f64::NAN));
            };
            let strength = cert.strength(d);
            b.constant("omega", cert.omega)
                .constant("epsilon", cert.epsilon)
                .constant("constant", 1.0 / strength);
            b.certificate = Some(cert);
            Ok(b.finish(e2_sq, vol / strength))
        }
        Theorem::Deshpande => {
            let dsh = c_dsh_integral(mu, d, params.cap)?;
            let factor = (d + 1) as f64;
            b.constant("int_c_dsh_sq", dsh)
                .check("dsh_lower_corrected", dsh, factor * e2_sq, true)
                .check("dsh_lower_uncorrected", dsh, e2_sq, false);
            if e2_sq > 0.0 {
                b.constant("dsh_over_e2_sq", dsh / e2_sq);
            }
            let Some(cert) = certificate(mu, d, SeparationFlavor::Central, params)? else {
                return Ok(b.not_applicable(e2_sq, f64::NAN));
            };
            let strength = cert.strength(d);
            b.constant("omega", cert.omega)
                .constant("epsilon", cert.epsilon)
                .constant("constant", 1.0 / strength);
            b.certificate = Some(cert);
            Ok(b.finish(e2_sq, dsh / strength))
        }
        Theorem::Singvals => {
            let sigma = mu.spectral_summary()?.spectrum.values;
            let (ratio, tail) = sym_tail_ratio(&sigma, d)?;
            b.constant("ratio", ratio).constant("tail", tail).check(
                "ratio_below_tail",
                ratio,
                tail,
                true,
            );
            let Some(cert) = certificate(mu, d, SeparationFlavor::Central, params)? else {
                return Ok(b.not_applicable(f64::NAN, ratio));
            };
            let strength = cert.strength(d);
            let lhs = strength * tail;
            b.constant("omega", cert.omega)
                .constant("epsilon", cert.epsilon)
                .check("tail_lower_corrected", lhs, (d + 1) as f64 * ratio, false);
            b.certificate = Some(cert);
            Ok(b.finish(lhs, ratio))
        }
        Theorem::MainModified => {
            let tau = params.tau.unwrap_or(0.0);
            let vol = integral(
                mu,
                IntegralSpec::new(GcnKind::VolMu, d).with_tau(tau),
                params,
            )?;
            b.constant("tau", tau)
                .constant("int_le_tau_c_vol_mu_sq", vol);
            let flavor = SeparationFlavor::SimplexWrt { tau };
            let Some(cert) = certificate(mu, d, flavor, params)? else {
                return Ok(b.not_applicable(e2_sq, f64::NAN));
            };
            let k = (d + 1) as f64;
            let s = cert.omega * cert.omega;
            let constant = 4.0 / (s * cert.epsilon.powi(d as i32 + 1))
                * (1.0 + 4.0 * k * k + 4.0 * k / (s * cert.epsilon));
            b.constant("omega", cert.omega)
                .constant("epsilon", cert.epsilon)
                .constant("constant", constant);
            b.certificate = Some(cert);
            Ok(b.finish(e2_sq, constant * vol))
        }
    }
}

/// Whether some `(d+1)` atoms span a nondegenerate d-simplex, and whether
/// `e_2(mu, d-1) > 0`; the two always agree.
///
/// Both tests are relative to the scale of `mu`: `M_d > 1e-10 diam^d` and
/// `e_2^2(mu, d-1) > 1e-12 diam^2`.
pub fn lemma_either_or(mu: &DiscreteMeasure, d: usize, cap: f64) -> Result<(bool, bool)> {
    if d == 0 {
        return Ok((true, true));
    }
    check_cap(mu.len(), d + 1, cap)?;
    let diam = mu.diameter();
    let vol_floor = 1e-10 * diam.powi(d as i32);
    let mut positive = false;
    if diam > 0.0 {
        for_each_combination(mu.len(), d + 1, |t| {
            if !positive {
                let verts: Vec<&[f64]> = t.iter().map(|&i| mu.atom(i)).collect();
                positive = simplex::volume(&verts) > vol_floor;
            }
        });
    }
    let e2_prev = if d - 1 > mu.dim() {
        0.0
    } else {
        mu.ls_flat(d - 1, None)?.e2_sq()
    };
    Ok((positive, diam > 0.0 && e2_prev > 1e-12 * diam * diam))
}

/// `(C_0, alpha_0)` of the multiscale lemma for `gamma`-regular measures
/// with regularity constant `c_mu`.
pub fn leger_constants(gamma: f64, c_mu: f64) -> Result<(f64, f64)> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(GcnError::InvalidArgument(format!(
            "gamma must exceed 1, got {gamma}"
        )));
    }
    if !(c_mu >= 1.0) || !c_mu.is_finite() {
        return Err(GcnError::InvalidArgument(format!(
            "regularity constant must be >= 1, got {c_mu}"
        )));
    }
    let c0 = 0.5 * (4.0 * 5f64.powf(gamma / 2.0) * c_mu * c_mu).powf(1.0 / (gamma - 1.0));
    let alpha0 = (4.0 * c_mu * c_mu).powf(-1.0 / gamma);
    if !c0.is_finite() {
        return Err(GcnError::Numerical(format!(
            "C_0 overflows for gamma = {gamma}"
        )));
    }
    Ok((c0, alpha0))
}
