//! Geometric condition numbers of simplices, least-squares flats of
//! discrete measures, and numerical checks of the inequalities relating
//! them.
//!
//! Measures are finitely supported on `R^D`. Integrals over product
//! measures are computed exactly by enumeration or by seeded Monte Carlo;
//! both are deterministic for a fixed seed regardless of thread count.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod applications;
pub mod error;
pub mod estimators;
pub mod fixtures;
pub mod gcn;
pub mod linalg;
pub mod measure;
pub mod simplex;

pub use error::{GcnError, Result};
pub use gcn::GcnKind;
pub use linalg::{AffineFlat, Spectrum};
pub use measure::DiscreteMeasure;
pub use simplex::Simplex;

/// Library version reported by the CLI.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
