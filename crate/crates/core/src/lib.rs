//! Jet differentials, jet metrics and Monte Carlo holomorphic Morse integrals.
//!
//! The crate is organised bottom-up:
//!
//! * [`jet`] – truncated jets, the reparametrization group `G_k` and its
//!   matrix action, series composition and reversion, invariant normalization.
//! * [`wronskian`] – wedge and scalar Wronskians and their weights.
//! * [`hermitian`] – curvature tensors on the fiber bundle, induced curvature
//!   on symmetric powers, hermitian (1,1)-forms and their signatures.
//! * [`metrics`] – the four jet-metric families, their base curvature forms
//!   and a finite-difference check of the curvature expansion.
//! * [`morse`] – seeded, chunk-independent Monte Carlo estimation of the
//!   Morse integrals, closed-form limits, delta scans and convergence reports.

pub mod error;
pub mod hermitian;
pub mod jet;
pub mod linalg;
pub mod metrics;
pub mod morse;
pub mod sampling;
pub mod wronskian;

pub use error::{Error, Result};
pub use hermitian::{BaseScenario, CurvatureModel, HermitianForm, Signature, SymPowerCurvature};
pub use jet::{Jet, Reparam, ScalarJet};
pub use metrics::{MetricKind, MetricSpec};
pub use morse::{MorseEstimate, QMode, Verdict};
pub use num_complex::Complex64;
pub use wronskian::WedgeWronskian;

/// Largest jet order accepted by [`Jet`] and [`Reparam`].
pub const MAX_JET_ORDER: usize = 12;
