//! Sensor layer: random deployment, bounded additive noise and dithered
//! one-bit quantization.

mod batch;
mod deployment;
mod noise;

use thiserror::Error;

pub use batch::{quantize_one, simulate_batch, SensorBatch, SensorStream};
pub use deployment::{DeploymentDensity, Tabulated, TABLE_CELLS};
pub use noise::NoiseModel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensingError {
    #[error("invalid deployment density: {0}")]
    InvalidDensity(String),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
}
