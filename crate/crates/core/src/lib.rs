//! Reconstruction of a deterministic field on `[0, 1]` from randomly placed
//! sensors that each report a single dithered bit.
//!
//! The pipeline is split into
//! - [`field_model`]: bases, test fields, true coefficients and tail energy;
//! - [`sensing`]: deployment densities, bounded noise and 1-bit dithered quantization;
//! - [`estimator`]: the importance-weighted coefficient estimator and truncation schedules;
//! - [`analysis`]: MSE bounds, consistency conditions, Monte-Carlo sweeps, rate fits and sample-path traces;
//! - [`harness`]: JSON experiment configs, suites and artifact writers behind the CLI.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod estimator;
pub mod field_model;
pub mod harness;
pub mod quadrature;
pub mod rng;
pub mod sensing;
pub mod stats;
