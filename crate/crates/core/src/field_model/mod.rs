//! Orthonormal bases on `[0, 1]`, the test-field menu and series utilities.

mod basis;
mod coefficients;
mod field;

pub use basis::Basis;
pub use coefficients::{
    coefficients_by_quadrature, m_term_approximation, m_term_error, make_sobolev_field, true_coefficients,
    CoefficientError, CoefficientVector,
};
pub use field::{
    BvShape, FieldClass, FieldDocument, FieldError, FieldSpec, J_TAIL, SOBOLEV_DELTA, SOBOLEV_TERMS,
    TAIL_TOLERANCE,
};
