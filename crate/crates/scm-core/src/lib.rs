//! Synthetic control estimation with spillover-aware donor handling.
//!
//! The crate is `no_std` + `alloc`: everything here works on owned buffers
//! with no IO, so it can sit under a CLI, a service, or an embedded study
//! runner alike. The companion `scm-cli` crate adds file formats and a
//! command-line front end.
//!
//! Five estimators share one primitive, least squares over the unit
//! simplex ([`solver::solve_simplex_ls`]):
//!
//! * `Unrestricted`: classic synthetic control over every donor.
//! * `Restricted`: drops donors flagged as spillover-affected.
//! * `Iterative`: cleans each flagged donor with its own synthetic
//!   control, then fits the treated unit against the cleaned pool.
//! * `Inclusive`: keeps affected units and solves a linear system in the
//!   cross-weights to unscramble treatment from spillover.
//! * `Sp`: regression-adjusts flagged donors' post periods, then fits on
//!   the full pool.
//!
//! [`dgp`] generates factor-model panels and [`grid`] runs the Monte
//! Carlo comparison grid deterministically from a single base seed.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod dgp;
pub mod estimators;
pub mod grid;
pub mod linalg;
pub mod panel;
pub mod rng;
pub mod solver;

pub use estimators::{estimate, EffectEstimate, EstimatorError, IterativeOpts, Method};
pub use panel::{Panel, PanelError};
