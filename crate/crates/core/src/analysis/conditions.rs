use serde::{Deserialize, Serialize};

use super::bounds::{deployment_integrals, ExtendedReal};
use crate::estimator::Schedule;
use crate::field_model::{true_coefficients, Basis, FieldSpec};
use crate::sensing::DeploymentDensity;
use crate::stats::compensated_sum;

/// MSE-consistency conditions of a schedule evaluated along an `n` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub schedule: Schedule,
    pub n_grid: Vec<usize>,
    pub m_values: Vec<usize>,
    /// `m(n)` non-decreasing and strictly growing across the grid.
    pub m_grows: bool,
    pub nu: f64,
    pub nu_positive: bool,
    /// `(1/n) Σ_{j<m(n)} ∫|φ_j|²/p_X` per grid point (`+∞` when divergent).
    pub variance_sums: Vec<f64>,
    /// `variance_sums` strictly decreasing and finite.
    pub variance_sum_decreasing: bool,
    pub pass: bool,
}

/// Checks the conditions for the integrated MSE to vanish:
/// growing `m(n)`, a positive deployment infimum, and a vanishing
/// `(1/n) Σ_{j<m(n)} ∫|φ_j|²/p_X`.
pub fn check_consistency_conditions(
    schedule: Schedule,
    basis: Basis,
    deploy: &DeploymentDensity,
    n_grid: &[usize],
) -> ConsistencyReport {
    let m_values: Vec<usize> = n_grid.iter().map(|&n| schedule.resolve(n)).collect();
    let nondecreasing = m_values.windows(2).all(|w| w[1] >= w[0]);
    let grows = m_values.len() >= 2 && m_values.last() > m_values.first();
    let m_max = m_values.iter().copied().max().unwrap_or(0);
    let integrals = deployment_integrals(basis, deploy, m_max);
    let variance_sums: Vec<f64> = n_grid
        .iter()
        .zip(&m_values)
        .map(|(&n, &m)| {
            if integrals[..m].iter().any(|v| !v.is_finite()) {
                f64::INFINITY
            } else {
                compensated_sum(integrals[..m].iter().map(ExtendedReal::as_f64)) / n as f64
            }
        })
        .collect();
    let decreasing = variance_sums.iter().all(|v| v.is_finite())
        && variance_sums.len() >= 2
        && variance_sums.windows(2).all(|w| w[1] < w[0]);
    let nu = deploy.infimum();
    let m_grows = nondecreasing && grows;
    ConsistencyReport {
        schedule,
        n_grid: n_grid.to_vec(),
        m_values,
        m_grows,
        nu,
        nu_positive: nu > 0.0,
        variance_sums,
        variance_sum_decreasing: decreasing,
        pass: m_grows && nu > 0.0 && decreasing,
    }
}

/// One row of the uniform-boundedness grid check at truncation `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCheckRow {
    pub m: usize,
    /// `max_{x,y} |Σ_{j<m} φ_j(x) φ_j*(y) / p_X(y)|`
    pub kernel_sup: f64,
    /// `C₁·m`
    pub kernel_bound: f64,
    /// `max_f max_x |Σ_{j<m} α_j φ_j(x)| / (C₂(f)·m)`
    pub partial_sum_ratio: f64,
    pub holds: bool,
}

/// Almost-sure schedule diagnostics for `m(n) = ⌈n^ψ⌉` and `Λ_m = m^{γ/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsScheduleReport {
    pub psi: f64,
    pub gamma: f64,
    /// `γψ`, the exponent of `Λ²_{m(n)} = n^{γψ}`.
    pub psi_prime: f64,
    /// `ψ ∈ (0,1)` and `γ ∈ (1, 1/ψ)`.
    pub summability_ok: bool,
    /// `m / Λ_m² → 0`, i.e. `γ > 1`.
    pub growth_ok: bool,
    pub beta: Option<f64>,
    pub nu: f64,
    /// `β²/ν` for `Λ_m = m`.
    pub c1: Option<f64>,
    /// `a·β·√vol(D)` (largest over the supplied fields).
    pub c2: Option<f64>,
    pub grid: Vec<KernelCheckRow>,
    pub grid_ok: bool,
    pub valid: bool,
}

/// Truncations used by the grid check.
pub const KERNEL_CHECK_M: [usize; 8] = [2, 4, 8, 16, 32, 64, 128, 256];
const KERNEL_GRID: usize = 101;

/// Validates an almost-sure schedule and, for uniformly bounded bases, checks
/// the kernel and partial-sum bounds on an `(x, y)` grid with `Λ_m = m`.
pub fn validate_as_schedule(
    psi: f64,
    gamma: f64,
    basis: Basis,
    deploy: &DeploymentDensity,
    fields: &[FieldSpec],
) -> AsScheduleReport {
    let psi_ok = psi > 0.0 && psi < 1.0;
    let summability_ok = psi_ok && gamma > 1.0 && gamma < 1.0 / psi;
    let growth_ok = gamma > 1.0;
    let nu = deploy.infimum();
    let beta = basis.amplitude_bound();
    let c1 = beta.filter(|_| nu > 0.0).map(|b| b * b / nu);
    let c2 = beta.map(|b| fields.iter().map(|f| f.amplitude() * b).fold(0.0, f64::max));

    let mut grid = Vec::new();
    if let (Some(b), Some(c1v)) = (beta, c1) {
        let points: Vec<f64> = (0..KERNEL_GRID).map(|i| i as f64 / (KERNEL_GRID - 1) as f64).collect();
        let cap = basis.dimension().unwrap_or(usize::MAX);
        let field_coeffs: Vec<_> = fields
            .iter()
            .filter_map(|f| true_coefficients(f, basis, KERNEL_CHECK_M[KERNEL_CHECK_M.len() - 1].min(cap)).ok())
            .collect();
        for &m in KERNEL_CHECK_M.iter().filter(|&&m| m <= cap) {
            let mut conj = vec![num_complex::Complex64::default(); m];
            let mut kernel_sup: f64 = 0.0;
            for &y in &points {
                basis.fill_conj(y, &mut conj);
                let inv_p = 1.0 / deploy.pdf(y);
                for &x in &points {
                    kernel_sup = kernel_sup.max(basis.synthesize(&conj, x).norm() * inv_p);
                }
            }
            let mut ratio: f64 = 0.0;
            for (field, coeffs) in fields.iter().zip(&field_coeffs) {
                let bound = field.amplitude() * b * m as f64;
                for &x in &points {
                    ratio = ratio.max(basis.synthesize(&coeffs.values[..m], x).norm() / bound);
                }
            }
            let kernel_bound = c1v * m as f64;
            grid.push(KernelCheckRow {
                m,
                kernel_sup,
                kernel_bound,
                partial_sum_ratio: ratio,
                holds: kernel_sup <= kernel_bound * (1.0 + 1e-9) && ratio <= 1.0 + 1e-9,
            });
        }
    }
    let grid_ok = !grid.is_empty() && grid.iter().all(|r| r.holds);
    AsScheduleReport {
        psi,
        gamma,
        psi_prime: gamma * psi,
        summability_ok,
        growth_ok,
        beta,
        nu,
        c1,
        c2,
        grid,
        grid_ok,
        valid: summability_ok && growth_ok && grid_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_model::BvShape;

    fn decades() -> Vec<usize> {
        vec![100, 1_000, 10_000, 100_000, 1_000_000]
    }

    #[test]
    fn bv_schedule_passes() {
        let r = check_consistency_conditions(Schedule::Bv, Basis::Fourier, &DeploymentDensity::Uniform, &decades());
        assert!(r.pass, "{r:?}");
        for (n, v) in r.n_grid.iter().zip(&r.variance_sums) {
            assert!((v - (*n as f64).sqrt().ceil() / *n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn fixed_schedule_fails_growth() {
        let r = check_consistency_conditions(Schedule::Fixed { m: 5 }, Basis::Fourier, &DeploymentDensity::Uniform, &decades());
        assert!(!r.m_grows);
        assert!(!r.pass);
    }

    #[test]
    fn linear_schedule_fails_variance() {
        let r = check_consistency_conditions(Schedule::Power { psi: 1.0 }, Basis::Fourier, &DeploymentDensity::Uniform, &decades());
        assert!(r.m_grows);
        assert!(!r.variance_sum_decreasing);
        assert!(r.variance_sums.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(!r.pass);
    }

    #[test]
    fn zero_infimum_fails() {
        let r = check_consistency_conditions(Schedule::Bv, Basis::Fourier, &DeploymentDensity::Linear2x, &decades());
        assert!(!r.nu_positive);
        assert!(r.variance_sums.iter().all(|v| v.is_infinite()));
        assert!(!r.pass);
    }

    #[test]
    fn as_schedule_arithmetic() {
        let saw = FieldSpec::bounded_variation(BvShape::Sawtooth, 0.5).unwrap();
        let ok = validate_as_schedule(0.5, 1.5, Basis::Fourier, &DeploymentDensity::Uniform, std::slice::from_ref(&saw));
        assert!(ok.valid);
        assert_eq!(ok.psi_prime, 0.75);
        let bad = validate_as_schedule(0.5, 2.5, Basis::Fourier, &DeploymentDensity::Uniform, &[saw]);
        assert!(!bad.summability_ok);
        assert!(!bad.valid);
    }

    #[test]
    fn fourier_kernel_equality_on_diagonal() {
        let r = validate_as_schedule(0.4, 2.0, Basis::Fourier, &DeploymentDensity::Uniform, &[]);
        assert_eq!(r.c1, Some(1.0));
        for row in &r.grid {
            assert!((row.kernel_sup - row.m as f64).abs() < 1e-9, "{row:?}");
        }
        let affine = validate_as_schedule(0.4, 2.0, Basis::Fourier, &DeploymentDensity::AffineFloor { nu: 0.5 }, &[]);
        assert_eq!(affine.c1, Some(2.0));
        assert!(affine.grid_ok);
        let mismatched = validate_as_schedule(0.4, 2.0, Basis::Fourier, &DeploymentDensity::Linear2x, &[]);
        assert!(mismatched.c1.is_none());
        assert!(!mismatched.valid);
    }
}
