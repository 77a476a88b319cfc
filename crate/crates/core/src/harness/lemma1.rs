//! Per-coefficient bias and variance study of the estimator.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::analysis::{basis_deployment_integral, AnalysisError};
use crate::estimator::{estimate_coefficients, EstimatorConfig, Schedule};
use crate::field_model::{true_coefficients, Basis, BvShape, FieldSpec};
use crate::rng::TrialSeed;
use crate::sensing::{simulate_batch, DeploymentDensity, NoiseModel};
use crate::stats::pairwise_sum;

/// Sizes of the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma1Plan {
    pub n: usize,
    pub trials: usize,
    pub coefficients: usize,
    pub seed: u64,
}

impl Default for Lemma1Plan {
    fn default() -> Self {
        Self {
            n: 1000,
            trials: 10_000,
            coefficients: 8,
            seed: 20240311,
        }
    }
}

/// Statistics of `α̂_j` for one (field, deployment, noise) setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Cell {
    pub field: String,
    pub deployment: String,
    pub noise: String,
    pub j: usize,
    pub alpha: Complex64,
    pub mean: Complex64,
    /// Largest per-component `|mean − α| / standard error`.
    pub z: f64,
    /// Sample variances of the real and imaginary parts.
    pub var_re: f64,
    pub var_im: f64,
    /// Sample `E|α̂ − mean|²`.
    pub variance: f64,
    /// `(c²/n) ∫|φ_j|²/p_X`
    pub variance_bound: f64,
}

pub fn lemma1_fields() -> Vec<(String, FieldSpec)> {
    let a1 = Complex64::new(0.2, -0.15);
    let a3 = Complex64::new(0.1, 0.15);
    vec![
        (
            "finite_dim_k5".into(),
            FieldSpec::finite_dim(Basis::Fourier, vec![Complex64::new(0.1, 0.0), a1, a1.conj(), a3, a3.conj()], 1.0)
                .expect("valid field"),
        ),
        (
            "sawtooth".into(),
            FieldSpec::bounded_variation(BvShape::Sawtooth, 0.5).expect("valid field"),
        ),
        (
            "unit_step".into(),
            FieldSpec::bounded_variation(BvShape::UnitStep, 1.0).expect("valid field"),
        ),
    ]
}

pub fn lemma1_deployments() -> Vec<DeploymentDensity> {
    vec![DeploymentDensity::Uniform, DeploymentDensity::AffineFloor { nu: 0.5 }]
}

pub fn lemma1_noises() -> Vec<NoiseModel> {
    vec![
        NoiseModel::Zero,
        NoiseModel::UniformSym { b: 0.5 },
        NoiseModel::TwoPoint { b: 0.5 },
    ]
}

fn sample_variance(values: &[f64], mean: f64) -> f64 {
    let sq: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    pairwise_sum(&sq) / (values.len() - 1) as f64
}

fn component_z(diff: f64, variance: f64, trials: usize) -> f64 {
    let se = (variance / trials as f64).sqrt();
    if se == 0.0 {
        if diff.abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff.abs() / se
    }
}

/// Runs every field × deployment × noise setting; setting `s` uses trial keys
/// `TrialSeed::for_grid(plan.seed, s, t)`.
pub fn lemma1_study(plan: Lemma1Plan, workers: usize) -> Result<Vec<Lemma1Cell>, HarnessError> {
    if plan.trials < 2 {
        return Err(AnalysisError::InvalidInput("at least 2 trials are required".into()).into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| AnalysisError::Pool(e.to_string()))?;
    let mut cells = Vec::new();
    let mut setting = 0usize;
    for (fname, field) in lemma1_fields() {
        let truth = true_coefficients(&field, Basis::Fourier, plan.coefficients).map_err(AnalysisError::from)?;
        for deploy in lemma1_deployments() {
            for noise in lemma1_noises() {
                let c = field.amplitude() + noise.bound();
                let cfg = EstimatorConfig {
                    basis: Basis::Fourier,
                    deploy: deploy.clone(),
                    c,
                    schedule: Schedule::Fixed { m: plan.coefficients },
                };
                let key = setting;
                let estimates: Vec<Vec<Complex64>> = pool.install(|| {
                    (0..plan.trials)
                        .into_par_iter()
                        .map(|t| {
                            let batch = simulate_batch(&field, &deploy, noise, plan.n, TrialSeed::for_grid(plan.seed, key, t));
                            estimate_coefficients(&batch, &cfg, plan.coefficients).map(|h| h.values)
                        })
                        .collect::<Result<_, _>>()
                        .map_err(AnalysisError::from)
                })?;
                for j in 0..plan.coefficients {
                    let re: Vec<f64> = estimates.iter().map(|e| e[j].re).collect();
                    let im: Vec<f64> = estimates.iter().map(|e| e[j].im).collect();
                    let t = plan.trials as f64;
                    let mean = Complex64::new(pairwise_sum(&re) / t, pairwise_sum(&im) / t);
                    let alpha = truth.values[j];
                    let var_re = sample_variance(&re, mean.re);
                    let var_im = sample_variance(&im, mean.im);
                    let z = component_z(mean.re - alpha.re, var_re, plan.trials)
                        .max(component_z(mean.im - alpha.im, var_im, plan.trials));
                    let variance = var_re + var_im;
                    let integral = basis_deployment_integral(Basis::Fourier, &deploy, j).as_f64();
                    cells.push(Lemma1Cell {
                        field: fname.clone(),
                        deployment: deploy.name(),
                        noise: noise.name(),
                        j,
                        alpha,
                        mean,
                        z,
                        var_re,
                        var_im,
                        variance,
                        variance_bound: c * c / plan.n as f64 * integral,
                    });
                }
                setting += 1;
            }
        }
    }
    Ok(cells)
}

pub fn lemma1_csv(cells: &[Lemma1Cell]) -> String {
    let mut out = String::from("field,deployment,noise,j,alpha_re,alpha_im,mean_re,mean_im,z,variance,variance_bound\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            super::csv_field(&c.field),
            super::csv_field(&c.deployment),
            super::csv_field(&c.noise),
            c.j, c.alpha.re, c.alpha.im, c.mean.re, c.mean.im, c.z, c.variance, c.variance_bound
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_study_shape_and_determinism() {
        let plan = Lemma1Plan {
            n: 50,
            trials: 20,
            coefficients: 3,
            seed: 1,
        };
        let a = lemma1_study(plan, 1).unwrap();
        assert_eq!(a.len(), 3 * 2 * 3 * 3);
        assert_eq!(lemma1_csv(&a), lemma1_csv(&lemma1_study(plan, 2).unwrap()));
        // φ₀ is real so the imaginary part of α̂₀ is exactly zero
        assert!(a.iter().filter(|c| c.j == 0).all(|c| c.mean.im == 0.0));
    }
}
