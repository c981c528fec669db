//! Experiment harness for `levyq-core`: TOML configuration, seeded
//! experiment drivers and CSV reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod report;
pub mod scenario;
pub mod streams;

pub use config::ExperimentConfig;
pub use experiments::HarnessError;
pub use report::ExperimentReport;
