//! Integrals of GCN powers, volume moments, separation certificates and
//! bound verification.

pub mod bounds;
pub mod concentration;
pub mod engine;
pub mod integral;
pub mod moments;
pub mod separation;

pub use bounds::{
    holds, leger_constants, lemma_either_or, verify_bound, BoundParams, BoundReport, BoundStatus,
    SubCheck, Theorem,
};
pub use concentration::{
    concentration_experiment, ConcentrationConfig, ConcentrationSummary, Trial,
};
pub use engine::DEFAULT_CAP;
pub use integral::{
    integral_exact, integral_mc, integrate, Anchor, IntegralEstimate, IntegralSpec, Mode,
};
pub use moments::{
    c_dsh_integral, moment_identity_check, sym_tail_ratio, volume_moment, MomentIdentity,
};
pub use separation::{
    certify_separation, SeparationCertificate, SeparationFlavor, DEFAULT_SEARCH_BUDGET,
};
