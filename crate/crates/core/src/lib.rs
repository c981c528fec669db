//! Simulation and Lévy-exponent estimation for Lévy-driven storage systems.
//!
//! The storage system has subordinator input `J(t)` and unit-rate output, so
//! the net input is `X(t) = J(t) - t` and the workload `V(t)` is the
//! reflection of `X` at zero. This crate provides:
//!
//! - [`model`]: parametric subordinators and closed-form functionals of the
//!   Lévy exponent `φ(α) = log E exp(-α X(1))`, its inverse `ψ`, the
//!   stationary and transient workload transforms, and the asymptotic variance
//!   of the grid estimator.
//! - [`levy`]: Lévy densities of Gamma / inverse Gaussian type, their
//!   ε-truncation and a samplable compound-Poisson surrogate.
//! - [`sim`]: exact event-driven simulation of the reflected workload and
//!   equidistant grid extraction.
//! - [`estimate`]: Poisson probing on the grid, the moment-equation estimator
//!   of `φ(α)`, plug-in variance, confidence intervals and the resampling
//!   estimator.
//!
//! The crate is `no_std` and only needs `alloc`. Randomness is supplied by the
//! caller through [`rand_core::RngCore`].

#![no_std]
#![deny(unsafe_code)]
// `!(x > y)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod math;

pub mod estimate;
pub mod levy;
pub mod model;
pub mod normal;
pub mod quad;
pub mod rng;
pub mod sim;
pub mod table;

pub use error::{Error, Result};
pub use estimate::{
    confidence_interval, draw_probes, estimate_grid, estimate_poisson, plugin_variance,
    resample_estimate, residuals, ConfidenceInterval, Estimate, ProbeSample, ResampleEstimate,
};
pub use levy::{build_truncated_cp, DensityTerm, LevyDensity, TruncatedCpSpec};
pub use model::{
    asymptotic_variance_from, bg_index, clt_gamma_range, mean_input_rate, suggest_delta,
    CompoundPoisson, GammaRange, JobDistribution, NetInputModel, SubordinatorSpec,
};
pub use sim::{burn_in, stationary_init, GridObservations, Jump, WorkloadPath};
pub use table::InverseCdfTable;
