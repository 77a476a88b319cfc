//! Fusion-center estimator: importance-weighted coefficient estimates from
//! `(location, bit)` pairs and the truncated series reconstruction.
//!
//! For `j < m`,
//! `α̂_j = (c/n) Σ_i conj(φ_j(X_i)) · B_i / p_X(X_i)`.
//! Only the locations, the bits, the dynamic range `c` and the known
//! deployment density enter; samples, thresholds and the noise law do not.

mod schedule;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use schedule::Schedule;

use crate::field_model::Basis;
use crate::sensing::{DeploymentDensity, SensorBatch};
use crate::stats::CompensatedComplexSum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("at least one coefficient must be estimated")]
    ZeroTerms,
    #[error("sensor batch is empty")]
    EmptyBatch,
    #[error("deployment density vanishes at observed location x = {x}")]
    ZeroDensity { x: f64 },
    #[error("requested {m} terms but the basis has dimension {dimension}")]
    TruncationExceedsBasis { m: usize, dimension: usize },
}

/// What the fusion center knows: basis, deployment density, dynamic range and schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub basis: Basis,
    pub deploy: DeploymentDensity,
    pub c: f64,
    pub schedule: Schedule,
}

impl EstimatorConfig {
    pub fn terms_for(&self, n: usize) -> usize {
        self.schedule.resolve(n)
    }
}

/// Estimated coefficients `α̂_0..α̂_{m-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionCoefficients {
    pub values: Vec<Complex64>,
    pub n_used: usize,
}

impl ReconstructionCoefficients {
    pub fn m(&self) -> usize {
        self.values.len()
    }
}

/// Running sums `Σ_i conj(φ_j(X_i)) B_i / p_X(X_i)` for `j < capacity`.
///
/// Sensors can be pushed one at a time; a snapshot at any `n` and any
/// `m ≤ capacity` equals the batch estimate over the first `n` sensors.
#[derive(Debug, Clone)]
pub struct CoefficientAccumulator {
    basis: Basis,
    deploy: DeploymentDensity,
    c: f64,
    sums: Vec<CompensatedComplexSum>,
    scratch: Vec<Complex64>,
    n: usize,
}

impl CoefficientAccumulator {
    pub fn new(basis: Basis, deploy: DeploymentDensity, c: f64, capacity: usize) -> Result<Self, EstimatorError> {
        if capacity == 0 {
            return Err(EstimatorError::ZeroTerms);
        }
        if let Some(dimension) = basis.dimension() {
            if capacity > dimension {
                return Err(EstimatorError::TruncationExceedsBasis { m: capacity, dimension });
            }
        }
        Ok(Self {
            basis,
            deploy,
            c,
            sums: vec![CompensatedComplexSum::default(); capacity],
            scratch: vec![Complex64::default(); capacity],
            n: 0,
        })
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, x: f64, bit: i8) -> Result<(), EstimatorError> {
        let p = self.deploy.pdf(x);
        if !(p > 0.0) {
            return Err(EstimatorError::ZeroDensity { x });
        }
        let weight = f64::from(bit) / p;
        match self.basis {
            // the step system has a single non-zero function at x
            Basis::Step { cells } => {
                self.basis.fill_conj(x, &mut self.scratch);
                let cell = self.scratch.iter().position(|v| v.re != 0.0);
                if let Some(j) = cell {
                    self.sums[j].add(Complex64::new((cells as f64).sqrt() * weight, 0.0));
                }
            }
            Basis::Fourier => {
                self.basis.fill_conj(x, &mut self.scratch);
                for (sum, phi) in self.sums.iter_mut().zip(&self.scratch) {
                    sum.add(phi * weight);
                }
            }
        }
        self.n += 1;
        Ok(())
    }

    pub fn push_batch(&mut self, x: &[f64], bits: &[i8]) -> Result<(), EstimatorError> {
        for (&xi, &bi) in x.iter().zip(bits) {
            self.push(xi, bi)?;
        }
        Ok(())
    }

    /// Estimates `α̂_j` for `j < m` from all sensors pushed so far.
    pub fn snapshot(&self, m: usize) -> Result<ReconstructionCoefficients, EstimatorError> {
        if m == 0 {
            return Err(EstimatorError::ZeroTerms);
        }
        if self.n == 0 {
            return Err(EstimatorError::EmptyBatch);
        }
        let scale = self.c / self.n as f64;
        let values = self.sums[..m.min(self.sums.len())]
            .iter()
            .map(|s| s.value() * scale)
            .collect();
        Ok(ReconstructionCoefficients { values, n_used: self.n })
    }
}

/// `α̂_j` for `j < m` from the locations and bits of `batch`.
pub fn estimate_coefficients(
    batch: &SensorBatch,
    cfg: &EstimatorConfig,
    m: usize,
) -> Result<ReconstructionCoefficients, EstimatorError> {
    if m == 0 {
        return Err(EstimatorError::ZeroTerms);
    }
    if batch.is_empty() {
        return Err(EstimatorError::EmptyBatch);
    }
    let mut acc = CoefficientAccumulator::new(cfg.basis, cfg.deploy.clone(), cfg.c, m)?;
    acc.push_batch(&batch.x, &batch.b)?;
    acc.snapshot(m)
}

/// `f̂(x) = Σ_{j<m} α̂_j φ_j(x)`.
pub fn reconstruct(coeffs: &ReconstructionCoefficients, basis: Basis, x: f64) -> Complex64 {
    basis.synthesize(&coeffs.values, x)
}

/// Real part of the reconstruction, for plotting only.
pub fn reconstruct_real(coeffs: &ReconstructionCoefficients, basis: Basis, x: f64) -> f64 {
    reconstruct(coeffs, basis, x).re
}
