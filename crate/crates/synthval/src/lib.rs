//! Synth-validation: data-informed selection of causal inference estimators.
//!
//! Given an observational dataset with a binary treatment and a real-valued
//! outcome, this crate benchmarks a registry of causal inference estimators
//! against generative distributions that are fit to the observed data while
//! encoding known synthetic average treatment effects, and selects the
//! estimator with the lowest expected estimation error.
//!
//! The pipeline (see [`selection::run_synth_validation`]):
//!
//! 1. run every registered estimator on the observed data ([`methods`]);
//! 2. derive a grid of synthetic effects from those estimates ([`synthgen`]);
//! 3. for each synthetic effect, fit a pair of conditional outcome means
//!    constrained so the encoded effect holds exactly ([`constrained`]);
//! 4. sample synthetic datasets via a semi-parametric bootstrap and score
//!    every estimator against the known effects ([`selection`]);
//! 5. report the estimator with the lowest mean absolute error.
//!
//! A simulation harness with known-truth data-generating processes lives in
//! [`scenarios`] and is used to validate the selection procedure against an
//! oracle selector.

pub mod constrained;
pub mod dataset;
pub mod error;
pub mod learners;
pub mod methods;
pub mod rng;
pub mod scenarios;
pub mod selection;
pub mod synthgen;

pub use dataset::ObservationalDataset;
pub use error::{Error, Result};
pub use rng::RngSeed;
