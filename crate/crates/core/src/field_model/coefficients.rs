use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::basis::Basis;
use super::field::FieldSpec;
use crate::quadrature::{integrate, QuadOptions, QuadratureError};
use crate::stats::compensated_sum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoefficientError {
    #[error("at least one coefficient must be requested")]
    ZeroCount,
    #[error("coefficient {index}: {source}")]
    Quadrature {
        index: usize,
        #[source]
        source: QuadratureError,
    },
}

/// Expansion coefficients `α_j = ⟨f, φ_j⟩`, `j = 0..J-1`, tagged with their basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub basis: Basis,
    pub values: Vec<Complex64>,
}

impl CoefficientVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ_{j<m} |α_j|²`.
    pub fn energy(&self, m: usize) -> f64 {
        compensated_sum(self.values[..m.min(self.values.len())].iter().map(|c| c.norm_sqr()))
    }

    /// Maximum violation of `α_{2k} = conj(α_{2k-1})`; zero for other bases.
    pub fn conjugate_asymmetry(&self) -> f64 {
        if self.basis != Basis::Fourier {
            return self.values.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        }
        let mut worst = self.values.first().map_or(0.0, |c| c.im.abs());
        let mut k = 1;
        while 2 * k < self.values.len() {
            worst = worst.max((self.values[2 * k] - self.values[2 * k - 1].conj()).norm());
            k += 1;
        }
        worst
    }
}

/// First `count` coefficients of `field` in `basis`, in closed form.
pub fn true_coefficients(field: &FieldSpec, basis: Basis, count: usize) -> Result<CoefficientVector, CoefficientError> {
    if count == 0 {
        return Err(CoefficientError::ZeroCount);
    }
    let values = (0..count)
        .into_par_iter()
        .map(|j| field.coefficient(basis, j))
        .collect();
    Ok(CoefficientVector { basis, values })
}

/// First `count` coefficients by adaptive quadrature at absolute tolerance
/// `1e-10`; used for fields or bases without a closed-form projection.
pub fn coefficients_by_quadrature(
    field: &FieldSpec,
    basis: Basis,
    count: usize,
) -> Result<CoefficientVector, CoefficientError> {
    if count == 0 {
        return Err(CoefficientError::ZeroCount);
    }
    let field_breaks = field.breakpoints();
    let values = (0..count)
        .into_par_iter()
        .map(|j| {
            let mut breaks = field_breaks.clone();
            breaks.extend(basis.breakpoints(j));
            let opts = QuadOptions {
                abs_tol: 1e-10,
                rel_tol: 0.0,
                max_segments: 100_000,
            };
            integrate(|x| basis.eval(j, x).conj() * field.eval(x), 0.0, 1.0, &breaks, opts)
                .map(|r| r.value)
                .map_err(|source| CoefficientError::Quadrature { index: j, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CoefficientVector { basis, values })
}

/// `f_m(x) = Σ_{j<m} α_j φ_j(x)`; `m` is capped at the vector length.
pub fn m_term_approximation(coeffs: &CoefficientVector, m: usize, x: f64) -> Complex64 {
    let m = m.min(coeffs.values.len());
    coeffs.basis.synthesize(&coeffs.values[..m], x)
}

/// `ε[f, m] = ‖f‖² − Σ_{j<m} |α_j|²`, clamped at zero.
pub fn m_term_error(coeffs: &CoefficientVector, field: &FieldSpec, m: usize) -> f64 {
    (field.norm_sq() - coeffs.energy(m)).max(0.0)
}

/// Sobolev-class test field; see [`FieldSpec::sobolev`].
pub fn make_sobolev_field(s: f64, seed: u64, a: f64) -> Result<FieldSpec, super::FieldError> {
    FieldSpec::sobolev(s, seed, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_model::{BvShape, J_TAIL};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_field_has_zero_coefficients() {
        for basis in [Basis::Fourier, Basis::Step { cells: 8 }] {
            let zero = FieldSpec::zero(1.0).unwrap();
            let cv = true_coefficients(&zero, basis, 4).unwrap();
            assert!(cv.values.iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn cosine_round_trip() {
        // cos(2πx) = (φ_1 + φ_2)/2
        let field = FieldSpec::finite_dim(Basis::Fourier, vec![c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0)], 1.0).unwrap();
        let cv = true_coefficients(&field, Basis::Fourier, 4).unwrap();
        assert_eq!(cv.values, vec![c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            assert!((field.eval(x) - (2.0 * std::f64::consts::PI * x).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn sawtooth_known_coefficients() {
        let saw = FieldSpec::bounded_variation(BvShape::Sawtooth, 0.5).unwrap();
        let cv = true_coefficients(&saw, Basis::Fourier, 5).unwrap();
        let inv = 1.0 / (2.0 * std::f64::consts::PI);
        assert!(cv.values[0].norm() < 1e-15);
        assert!((cv.values[1] - c(0.0, -inv)).norm() < 1e-14);
        assert!((cv.values[2] - c(0.0, inv)).norm() < 1e-14);
        assert!((cv.values[4] - c(0.0, inv / 2.0)).norm() < 1e-14);
    }

    #[test]
    fn closed_form_agrees_with_quadrature() {
        let fields = [
            FieldSpec::bounded_variation(BvShape::Staircase, 1.0).unwrap(),
            FieldSpec::bounded_variation(BvShape::UnitStep, 1.0).unwrap(),
            FieldSpec::finite_dim(Basis::Step { cells: 3 }, vec![c(0.2, 0.0), c(-0.3, 0.0), c(0.1, 0.0)], 1.0).unwrap(),
        ];
        for field in &fields {
            for basis in [Basis::Fourier, Basis::Step { cells: 6 }] {
                let closed = true_coefficients(field, basis, 12).unwrap();
                let quad = coefficients_by_quadrature(field, basis, 12).unwrap();
                for (a, b) in closed.values.iter().zip(&quad.values) {
                    assert!((a - b).norm() < 1e-9);
                }
            }
        }
        let sob = FieldSpec::sobolev(1.5, 3, 1.0).unwrap();
        let closed = true_coefficients(&sob, Basis::Step { cells: 4 }, 4).unwrap();
        let quad = coefficients_by_quadrature(&sob, Basis::Step { cells: 4 }, 4).unwrap();
        for (a, b) in closed.values.iter().zip(&quad.values) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn m_term_error_edges() {
        let coeffs = vec![c(0.1, 0.0), c(0.2, -0.15), c(0.2, 0.15), c(0.1, 0.15), c(0.1, -0.15)];
        let field = FieldSpec::finite_dim(Basis::Fourier, coeffs, 1.0).unwrap();
        let cv = true_coefficients(&field, Basis::Fourier, 8).unwrap();
        assert_eq!(m_term_error(&cv, &field, 5), 0.0);
        assert_eq!(m_term_error(&cv, &field, 0), field.norm_sq());
        assert_eq!(m_term_approximation(&cv, 0, 0.3), c(0.0, 0.0));
        for i in 0..=50 {
            let x = i as f64 / 50.0;
            assert!((m_term_approximation(&cv, 5, x).re - field.eval(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn sawtooth_tail_is_small_beyond_j_tail() {
        let saw = FieldSpec::bounded_variation(BvShape::Sawtooth, 0.5).unwrap();
        let cv = true_coefficients(&saw, Basis::Fourier, J_TAIL).unwrap();
        assert!(cv.conjugate_asymmetry() < 1e-10);
        assert!(m_term_error(&cv, &saw, J_TAIL) < 1e-4 * saw.norm_sq());
    }

    #[test]
    fn sobolev_is_deterministic() {
        let a = make_sobolev_field(1.0, 5, 1.0).unwrap();
        let b = make_sobolev_field(1.0, 5, 1.0).unwrap();
        let other = make_sobolev_field(1.0, 6, 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
    }
}
