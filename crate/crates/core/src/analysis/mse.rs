use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::estimator::{estimate_coefficients, EstimatorConfig, ReconstructionCoefficients};
use crate::field_model::{true_coefficients, CoefficientVector, FieldSpec};
use crate::rng::TrialSeed;
use crate::sensing::{simulate_batch, DeploymentDensity, NoiseModel};
use crate::stats::{compensated_sum, Summary};

/// `‖f − f̂‖²` computed in coefficient space:
/// `Σ_{j<m} |α̂_j − α_j|² + (‖f‖² − Σ_{j<m} |α_j|²)`.
///
/// # Panics
/// If `truth` holds fewer than `m` coefficients.
pub fn integrated_squared_error(hat: &ReconstructionCoefficients, truth: &CoefficientVector, field: &FieldSpec) -> f64 {
    squared_error_with_norm(hat, truth, field.norm_sq())
}

/// Same as [`integrated_squared_error`] with `‖f‖²` supplied directly.
pub fn squared_error_with_norm(hat: &ReconstructionCoefficients, truth: &CoefficientVector, norm_sq: f64) -> f64 {
    let m = hat.m();
    assert!(truth.len() >= m, "need {m} true coefficients, have {}", truth.len());
    let estimation = compensated_sum(hat.values.iter().zip(&truth.values).map(|(h, a)| (h - a).norm_sqr()));
    let tail = (norm_sq - truth.energy(m)).max(0.0);
    estimation + tail
}

/// Number of trials per grid point: `base`, or `large` once `n > threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialPolicy {
    pub base: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub large_n: Option<LargeN>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LargeN {
    pub threshold: usize,
    pub trials: usize,
}

impl TrialPolicy {
    pub fn fixed(trials: usize) -> Self {
        Self { base: trials, large_n: None }
    }

    /// 200 trials up to `n = 2^14`, 50 beyond.
    pub fn rate_default() -> Self {
        Self {
            base: 200,
            large_n: Some(LargeN { threshold: 1 << 14, trials: 50 }),
        }
    }

    pub fn for_n(&self, n: usize) -> usize {
        match self.large_n {
            Some(l) if n > l.threshold => l.trials,
            _ => self.base,
        }
    }

    pub fn min_trials(&self) -> usize {
        self.large_n.map_or(self.base, |l| l.trials.min(self.base))
    }
}

/// Monte-Carlo integrated squared error at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsePoint {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub mean: f64,
    pub std: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl MsePoint {
    pub fn ci_half_width(&self) -> f64 {
        0.5 * (self.ci_hi - self.ci_lo)
    }
}

/// Runs independent simulate, estimate and score pipelines for each `n`.
///
/// Trial `t` at grid index `i` is seeded with `TrialSeed::for_grid(seed, i, t)`,
/// and the per-trial errors are reduced in trial order, so the result does not
/// depend on `workers` (0 means the rayon default).
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_mse(
    field: &FieldSpec,
    deploy: &DeploymentDensity,
    noise: NoiseModel,
    cfg: &EstimatorConfig,
    n_grid: &[usize],
    trials: TrialPolicy,
    seed: u64,
    workers: usize,
) -> Result<Vec<MsePoint>, AnalysisError> {
    if trials.min_trials() < 2 {
        return Err(AnalysisError::InvalidInput("at least 2 trials per grid point are required".into()));
    }
    if n_grid.contains(&0) {
        return Err(AnalysisError::InvalidInput("n must be at least 1".into()));
    }
    let ms: Vec<usize> = n_grid.iter().map(|&n| cfg.terms_for(n)).collect();
    let m_max = ms.iter().copied().max().unwrap_or(1);
    if let Some(dimension) = cfg.basis.dimension() {
        if m_max > dimension {
            return Err(crate::estimator::EstimatorError::TruncationExceedsBasis { m: m_max, dimension }.into());
        }
    }
    let truth = true_coefficients(field, cfg.basis, m_max)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| AnalysisError::Pool(e.to_string()))?;

    let mut out = Vec::with_capacity(n_grid.len());
    for (point, (&n, &m)) in n_grid.iter().zip(&ms).enumerate() {
        let count = trials.for_n(n);
        let errors: Vec<f64> = pool.install(|| {
            (0..count)
                .into_par_iter()
                .map(|t| {
                    let batch = simulate_batch(field, deploy, noise, n, TrialSeed::for_grid(seed, point, t));
                    let hat = estimate_coefficients(&batch, cfg, m)?;
                    Ok(integrated_squared_error(&hat, &truth, field))
                })
                .collect::<Result<_, AnalysisError>>()
        })?;
        let s = Summary::from_samples(&errors);
        out.push(MsePoint {
            n,
            m,
            trials: count,
            mean: s.mean,
            std: s.std,
            ci_lo: s.ci_lo,
            ci_hi: s.ci_hi,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::Schedule;
    use crate::field_model::{Basis, BvShape};
    use num_complex::Complex64;

    fn k5() -> FieldSpec {
        let a1 = Complex64::new(0.2, -0.15);
        let a3 = Complex64::new(0.1, 0.15);
        FieldSpec::finite_dim(Basis::Fourier, vec![Complex64::new(0.1, 0.0), a1, a1.conj(), a3, a3.conj()], 1.0).unwrap()
    }

    fn cfg(field: &FieldSpec, noise: NoiseModel, schedule: Schedule) -> EstimatorConfig {
        EstimatorConfig {
            basis: Basis::Fourier,
            deploy: DeploymentDensity::Uniform,
            c: field.amplitude() + noise.bound(),
            schedule,
        }
    }

    #[test]
    fn exact_estimate_scores_zero() {
        let f = k5();
        let truth = true_coefficients(&f, Basis::Fourier, 5).unwrap();
        let hat = ReconstructionCoefficients { values: truth.values.clone(), n_used: 1 };
        assert!(integrated_squared_error(&hat, &truth, &f).abs() < 1e-15);
    }

    #[test]
    fn zero_estimate_scores_norm() {
        let f = FieldSpec::bounded_variation(BvShape::Sawtooth, 0.5).unwrap();
        let truth = true_coefficients(&f, Basis::Fourier, 9).unwrap();
        let hat = ReconstructionCoefficients { values: vec![Complex64::default(); 9], n_used: 1 };
        assert!((integrated_squared_error(&hat, &truth, &f) - f.norm_sq()).abs() < 1e-12);
        assert!((f.norm_sq() - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn hand_arithmetic_matches_quadrature() {
        let truth = CoefficientVector {
            basis: Basis::Fourier,
            values: vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5)],
        };
        let hat = ReconstructionCoefficients { values: vec![Complex64::new(1.0, 0.0), Complex64::default()], n_used: 1 };
        let got = squared_error_with_norm(&hat, &truth, 0.5);
        assert!((got - 0.5).abs() < 1e-15);
        let diff = |x: f64| {
            let f = 0.5 * Basis::Fourier.eval(0, x) + Complex64::new(0.0, 0.5) * Basis::Fourier.eval(1, x);
            Complex64::new((f - Basis::Fourier.eval(0, x)).norm_sqr(), 0.0)
        };
        let direct = crate::quadrature::integrate(diff, 0.0, 1.0, &[], crate::quadrature::QuadOptions::default()).unwrap();
        assert!((direct.value.re - got).abs() < 1e-10);
    }

    #[test]
    fn zero_field_variance_bound() {
        let f = FieldSpec::zero(1.0).unwrap();
        let noise = NoiseModel::UniformSym { b: 0.5 };
        let c = cfg(&f, noise, Schedule::Fixed { m: 1 });
        let pts = monte_carlo_mse(&f, &DeploymentDensity::Uniform, noise, &c, &[10_000], TrialPolicy::fixed(200), 7, 0).unwrap();
        let bound = c.c * c.c / 10_000.0;
        assert!(pts[0].mean <= 1.2 * bound, "{} vs {}", pts[0].mean, bound);
        assert!(pts[0].mean > 0.5 * bound);
    }

    #[test]
    fn deterministic_in_seed_and_workers() {
        let f = k5();
        let noise = NoiseModel::UniformSym { b: 1.0 };
        let c = cfg(&f, noise, Schedule::FiniteDim { k: 5 });
        let run = |w| monte_carlo_mse(&f, &DeploymentDensity::Uniform, noise, &c, &[64, 256], TrialPolicy::fixed(2), 11, w).unwrap();
        let a = run(1);
        assert_eq!(a, run(1));
        assert_eq!(a, run(3));
        let other = monte_carlo_mse(&f, &DeploymentDensity::Uniform, noise, &c, &[64, 256], TrialPolicy::fixed(2), 12, 1).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn finite_dim_ratio_tracks_inverse_n() {
        let f = k5();
        let noise = NoiseModel::UniformSym { b: 1.0 };
        let c = cfg(&f, noise, Schedule::FiniteDim { k: 5 });
        let pts = monte_carlo_mse(&f, &DeploymentDensity::Uniform, noise, &c, &[1_000, 10_000], TrialPolicy::fixed(200), 3, 0).unwrap();
        let ratio = pts[0].mean / pts[1].mean;
        assert!((6.0..=14.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn trial_policy() {
        let p = TrialPolicy::rate_default();
        assert_eq!(p.for_n(1 << 14), 200);
        assert_eq!(p.for_n((1 << 14) + 1), 50);
        assert_eq!(p.min_trials(), 50);
        let f = k5();
        let c = cfg(&f, NoiseModel::Zero, Schedule::FiniteDim { k: 5 });
        assert!(monte_carlo_mse(&f, &DeploymentDensity::Uniform, NoiseModel::Zero, &c, &[10], TrialPolicy::fixed(1), 0, 1).is_err());
    }
}
