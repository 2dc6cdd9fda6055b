//! Empirical mode decomposition and its ensemble variants.
//!
//! `modekit` decomposes a uniformly sampled signal into intrinsic mode
//! functions (IMFs) plus a residue with three drivers:
//!
//! - [`decompose::emd`] — standard EMD with a choice of four sifting
//!   stop criteria ([`sifting::StopRule`]);
//! - [`decompose::eemd`] — ensemble EMD averaging over white-noise
//!   perturbed copies of the signal;
//! - [`decompose::ceemdan`] — complete ensemble EMD with adaptive noise,
//!   which recovers exact reconstruction.
//!
//! The [`experiments`] module supplies synthetic signal generators, a CSV
//! ingestion path, and a deterministic parameter-sweep harness; the
//! [`metrics`] module computes reconstruction error (ECM), orthogonality,
//! and mode-period diagnostics.

pub mod decompose;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod noise;
pub mod plot;
pub mod sifting;
pub mod signal;

pub use decompose::{ceemdan, eemd, emd, Decomposition, EnsembleConfig, Method};
pub use error::{Error, Result};
pub use noise::NoisePlan;
pub use sifting::{StopCriterion, StopRule};
pub use signal::Signal;
