use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SensingError;

/// Zero-mean noise laws supported on `[-b, +b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    Zero,
    UniformSym { b: f64 },
    /// Gaussian with scale `sigma`, conditioned on `|Z| ≤ b`.
    TruncGauss { sigma: f64, b: f64 },
    /// `±b` with probability 1/2 each.
    TwoPoint { b: f64 },
}

impl NoiseModel {
    pub fn bound(&self) -> f64 {
        match *self {
            NoiseModel::Zero => 0.0,
            NoiseModel::UniformSym { b } | NoiseModel::TruncGauss { b, .. } | NoiseModel::TwoPoint { b } => b,
        }
    }

    pub fn validate(&self) -> Result<(), SensingError> {
        let b = self.bound();
        if !(b.is_finite() && b >= 0.0) {
            return Err(SensingError::InvalidNoise(format!("bound must be finite and non-negative, got {b}")));
        }
        if let NoiseModel::TruncGauss { sigma, .. } = *self {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(SensingError::InvalidNoise(format!("sigma must be positive, got {sigma}")));
            }
            if b / sigma < 0.1 {
                return Err(SensingError::InvalidNoise("truncation b/σ below 0.1".into()));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::Zero => 0.0,
            NoiseModel::UniformSym { b } => b * (2.0 * rng.random::<f64>() - 1.0),
            NoiseModel::TruncGauss { sigma, b } => {
                let normal = Normal::new(0.0, sigma).expect("validated sigma");
                loop {
                    let z: f64 = normal.sample(rng);
                    if z.abs() <= b {
                        return z;
                    }
                }
            }
            NoiseModel::TwoPoint { b } => {
                if rng.random::<bool>() {
                    b
                } else {
                    -b
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match *self {
            NoiseModel::Zero => "zero".into(),
            NoiseModel::UniformSym { b } => format!("uniform_sym(b={b})"),
            NoiseModel::TruncGauss { sigma, b } => format!("trunc_gauss(sigma={sigma},b={b})"),
            NoiseModel::TwoPoint { b } => format!("two_point(b={b})"),
        }
    }
}
