use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::field_model::{m_term_error, true_coefficients, Basis, CoefficientVector, FieldSpec};
use crate::quadrature::{integrate_real, QuadOptions};
use crate::sensing::DeploymentDensity;
use crate::stats::compensated_sum;

/// Probe offsets from a zero of the density.
pub const DIVERGENCE_PROBES: [f64; 3] = [1e-3, 1e-6, 1e-9];

/// Value of `∫ |φ_j|² / p_X`, which may diverge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    /// `+∞` for divergent values.
    pub fn as_f64(&self) -> f64 {
        match *self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::Infinite => f64::INFINITY,
        }
    }
}

fn quad_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_segments: 20_000,
    }
}

/// `∫ g` over `[δ, 1/2]` (zero at the left end) or `[1/2, 1 − δ]`, split
/// into decades of distance from the zero.
fn decade_integral(g: &dyn Fn(f64) -> f64, delta: f64, anchor_left: bool, breaks: &[f64]) -> f64 {
    let mut distances = vec![delta];
    while distances.last().copied().unwrap_or(0.5) * 10.0 < 0.5 {
        let next = distances.last().copied().unwrap_or(0.5) * 10.0;
        distances.push(next);
    }
    distances.push(0.5);
    let mut total = 0.0;
    for w in distances.windows(2) {
        let (a, b) = if anchor_left { (w[0], w[1]) } else { (1.0 - w[1], 1.0 - w[0]) };
        total += integrate_real(g, a, b, breaks, quad_opts()).unwrap_or(f64::INFINITY);
    }
    total
}

/// Divergence probe at one zero endpoint: integrals over `[δ, ·]` for the
/// three probe offsets. Growth that does not decay between probe decades
/// means the integral diverges; otherwise the tail is extrapolated.
fn probe_endpoint(g: &dyn Fn(f64) -> f64, anchor_left: bool, breaks: &[f64]) -> ExtendedReal {
    let values: Vec<f64> = DIVERGENCE_PROBES
        .iter()
        .map(|&delta| decade_integral(g, delta, anchor_left, breaks))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return ExtendedReal::Infinite;
    }
    let d1 = values[1] - values[0];
    let d2 = values[2] - values[1];
    let huge = values[2] > 1e3 && values[2] > 10.0 * values[1];
    if huge || (d2 > 1e-12 && d2 >= 0.5 * d1) {
        return ExtendedReal::Infinite;
    }
    let tail = if d1 > 0.0 && d2 > 0.0 { d2 * (d2 / d1) / (1.0 - d2 / d1) } else { 0.0 };
    ExtendedReal::Finite(values[2] + tail)
}

/// `∫₀¹ |φ_j(x)|² / p_X(x) dx`, flagged infinite when the density's zero
/// makes it diverge.
pub fn basis_deployment_integral(basis: Basis, deploy: &DeploymentDensity, j: usize) -> ExtendedReal {
    if basis.dimension().is_some_and(|d| j >= d) {
        return ExtendedReal::Finite(0.0);
    }
    if let DeploymentDensity::Custom { weights } = deploy {
        // exact: the density is constant on each cell
        let mut total = 0.0;
        for (lo, hi, density) in weights.cells_with_density() {
            let mass = match basis {
                Basis::Fourier => hi - lo,
                Basis::Step { cells } => {
                    let k = cells as f64;
                    let overlap = hi.min((j + 1) as f64 / k) - lo.max(j as f64 / k);
                    k * overlap.max(0.0)
                }
            };
            if mass > 0.0 {
                if density <= 0.0 {
                    return ExtendedReal::Infinite;
                }
                total += mass / density;
            }
        }
        return ExtendedReal::Finite(total);
    }

    let g = |x: f64| basis.eval(j, x).norm_sqr() / deploy.pdf(x);
    let mut breaks = basis.breakpoints(j);
    breaks.extend(deploy.breakpoints());
    let left_zero = deploy.pdf(0.0) <= 0.0;
    let right_zero = deploy.pdf(1.0) <= 0.0;
    if deploy.infimum() > 0.0 || !(left_zero || right_zero) {
        return match integrate_real(g, 0.0, 1.0, &breaks, quad_opts()) {
            Ok(v) => ExtendedReal::Finite(v),
            Err(_) => ExtendedReal::Infinite,
        };
    }
    let left = if left_zero {
        probe_endpoint(&g, true, &breaks)
    } else {
        ExtendedReal::Finite(integrate_real(g, 0.0, 0.5, &breaks, quad_opts()).unwrap_or(f64::INFINITY))
    };
    let right = if right_zero {
        probe_endpoint(&g, false, &breaks)
    } else {
        ExtendedReal::Finite(integrate_real(g, 0.5, 1.0, &breaks, quad_opts()).unwrap_or(f64::INFINITY))
    };
    match (left, right) {
        (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) if (a + b).is_finite() => ExtendedReal::Finite(a + b),
        _ => ExtendedReal::Infinite,
    }
}

/// Integrals for `j < m`; computed once when every `|φ_j|` is identically one.
pub fn deployment_integrals(basis: Basis, deploy: &DeploymentDensity, m: usize) -> Vec<ExtendedReal> {
    if basis.unit_modulus() {
        if m == 0 {
            return Vec::new();
        }
        vec![basis_deployment_integral(basis, deploy, 0); m]
    } else {
        (0..m).map(|j| basis_deployment_integral(basis, deploy, j)).collect()
    }
}

/// Upper bound on the integrated MSE of the `m`-term estimate from `n` sensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub m: usize,
    /// `(c²/n) Σ_{j<m} ∫|φ_j|²/p_X`
    pub variance_term: f64,
    /// `ε[f, m]`
    pub bias_term: f64,
    pub total: f64,
    /// `c²m/(nν) + ε[f, m]`
    pub reduced_total: f64,
    pub per_j_integrals: Vec<ExtendedReal>,
    pub divergent_indices: Vec<usize>,
}

impl BoundReport {
    pub fn is_finite(&self) -> bool {
        self.divergent_indices.is_empty()
    }
}

/// Assembles the bound from precomputed true coefficients and integrals.
pub fn mse_bound_from_parts(
    coeffs: &CoefficientVector,
    field: &FieldSpec,
    integrals: &[ExtendedReal],
    nu: f64,
    n: usize,
    m: usize,
    c: f64,
) -> BoundReport {
    let per_j_integrals = integrals[..m].to_vec();
    let divergent_indices: Vec<usize> = per_j_integrals
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_finite())
        .map(|(j, _)| j)
        .collect();
    let scale = c * c / n as f64;
    let variance_term = if divergent_indices.is_empty() {
        scale * compensated_sum(per_j_integrals.iter().map(ExtendedReal::as_f64))
    } else {
        f64::INFINITY
    };
    let bias_term = if m == 0 { field.norm_sq() } else { m_term_error(coeffs, field, m) };
    let reduced_variance = if m == 0 {
        0.0
    } else if nu > 0.0 {
        scale * m as f64 / nu
    } else {
        f64::INFINITY
    };
    BoundReport {
        n,
        m,
        variance_term,
        bias_term,
        total: variance_term + bias_term,
        reduced_total: reduced_variance + bias_term,
        per_j_integrals,
        divergent_indices,
    }
}

/// Integrated-MSE upper bound `(c²/n) Σ_{j<m} ∫|φ_j|²/p_X + ε[f, m]`.
pub fn mse_upper_bound(
    field: &FieldSpec,
    basis: Basis,
    deploy: &DeploymentDensity,
    n: usize,
    m: usize,
    c: f64,
) -> Result<BoundReport, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::InvalidInput("n must be at least 1".into()));
    }
    let coeffs = true_coefficients(field, basis, m.max(1))?;
    let integrals = deployment_integrals(basis, deploy, m);
    Ok(mse_bound_from_parts(&coeffs, field, &integrals, deploy.infimum(), n, m, c))
}
