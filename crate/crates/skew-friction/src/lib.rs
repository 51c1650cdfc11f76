//! Closed-form densities for skew Brownian motion with two-valued
//! (dry friction) drift, together with an independent lattice Monte
//! Carlo oracle and the comparison machinery that validates one against
//! the other.
//!
//! The process solves `dX_t = -mu(X_t) dt + dW_t + (2p - 1) dL_t(X)`
//! where `mu` takes the value `-m1` below the origin and `m2` above it,
//! `L_t(X)` is the symmetric local time at zero, and `p` is the skew
//! parameter. The dry friction case is `m1 = m2 = m >= 0`.
//!
//! Available laws at a fixed horizon `T` (all through [`analytic`]):
//!
//! * marginal density and CDF of `X_T`
//! * joint densities of `X_T` with the local time `L_T`, the last visit
//!   to the origin `tau`, the occupation time of `[0, inf)` denoted `U`,
//!   and the pre-`tau` occupation time `V`
//! * occupation time and local time marginals
//!
//! The occupation/local-time joint is exposed in two variants
//! ([`analytic::OccupationForm`]): the corrected closed form, which
//! normalizes to 1 and matches simulation, and a verbatim transcription
//! of the published expression, kept evaluable because it integrates to
//! `2 T` instead of 1 and the discrepancy is part of what this crate
//! demonstrates.
//!
//! [`simulate`] is deliberately independent of [`analytic`]: it knows
//! nothing about the closed forms and realizes the process as a skew
//! random walk on `delta * Z` with drift applied through the step
//! probabilities. [`validate`] compares the two sides with KS and
//! chi-square tests and packages the outcome as a replayable report.
//!
//! ```
//! use skew_friction::model::ModelParams;
//! use skew_friction::analytic;
//!
//! let params = ModelParams::dry_friction(0.7, 0.5, 1.0).unwrap();
//! let at_origin = analytic::marginal_density(0.0, &params).unwrap();
//! assert!(at_origin > 0.0);
//! // the sign law: P(X_T >= 0) = p exactly, for every friction level
//! assert!((analytic::marginal_cdf(0.0, &params).unwrap() - 0.3).abs() < 1e-12);
//! ```

pub mod analytic;
pub mod cli;
pub mod error;
pub mod grid;
pub mod model;
pub mod quadrature;
pub mod simulate;
pub mod special;
pub mod validate;

pub use analytic::OccupationForm;
pub use error::{Error, Result};
pub use model::{Drift, ModelParams};
pub use quadrature::QuadratureSpec;
pub use simulate::LatticeConfig;
pub use validate::{Profile, ValidationReport};
