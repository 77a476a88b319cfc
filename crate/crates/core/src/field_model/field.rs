use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::basis::Basis;
use crate::quadrature::{integrate_real, QuadOptions};
use crate::stats::compensated_sum;

/// Number of coefficients standing in for an infinite expansion.
pub const J_TAIL: usize = 16_384;
/// Coefficients synthesised for a Sobolev test field.
pub const SOBOLEV_TERMS: usize = 1_024;
/// Extra decay exponent above `s + 1/2` for Sobolev synthesis.
pub const SOBOLEV_DELTA: f64 = 0.05;
/// Relative energy allowed beyond [`J_TAIL`].
pub const TAIL_TOLERANCE: f64 = 1e-4;

const SYMMETRY_TOL: f64 = 1e-10;
const AMPLITUDE_GRID: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("amplitude bound must be positive and finite, got {0}")]
    InvalidAmplitude(f64),
    #[error("field exceeds its amplitude bound: sup |f| = {sup} > a = {a}")]
    AmplitudeExceeded { sup: f64, a: f64 },
    #[error("finite-dimensional field needs at least one coefficient")]
    Empty,
    #[error("coefficient count {count} does not fit a basis of dimension {dimension}")]
    TooManyCoefficients { count: usize, dimension: usize },
    #[error("coefficients do not describe a real field (index {index})")]
    NotReal { index: usize },
    #[error("Sobolev smoothness must exceed 1/2, got {0}")]
    SmoothnessTooLow(f64),
    #[error("series tail beyond {terms} terms holds {residual:e} of the energy (limit {limit:e})")]
    TailTooHeavy { terms: usize, residual: f64, limit: f64 },
    #[error("coefficient count {got} does not match k = {k}")]
    CountMismatch { k: usize, got: usize },
}

/// Bounded-variation test shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BvShape {
    /// 0 on `[0, 1/2)`, 1 on `[1/2, 1]`.
    UnitStep,
    /// `x - 1/2`.
    Sawtooth,
    /// Levels -3/4, -1/4, 1/4, 3/4 on the four quarters.
    Staircase,
}

impl BvShape {
    fn segments(self) -> Vec<LinearPiece> {
        match self {
            BvShape::UnitStep => vec![
                LinearPiece::constant(0.0, 0.5, 0.0),
                LinearPiece::constant(0.5, 1.0, 1.0),
            ],
            BvShape::Sawtooth => vec![LinearPiece {
                lo: 0.0,
                hi: 1.0,
                p: -0.5,
                q: 1.0,
            }],
            BvShape::Staircase => (0..4)
                .map(|i| LinearPiece::constant(i as f64 / 4.0, (i + 1) as f64 / 4.0, -0.75 + 0.5 * i as f64))
                .collect(),
        }
    }
}

/// Class tag as it appears in configuration documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", content = "params", rename_all = "snake_case")]
pub enum FieldClass {
    FiniteDim {
        #[serde(default)]
        basis: Basis,
        k: usize,
    },
    BoundedVariation {
        shape: BvShape,
    },
    Sobolev {
        s: f64,
        seed: u64,
    },
}

/// `p + q·x` on `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LinearPiece {
    pub lo: f64,
    pub hi: f64,
    pub p: f64,
    pub q: f64,
}

impl LinearPiece {
    fn constant(lo: f64, hi: f64, level: f64) -> Self {
        Self { lo, hi, p: level, q: 0.0 }
    }

    fn at(&self, x: f64) -> f64 {
        self.p + self.q * x
    }

    fn energy(&self) -> f64 {
        // ∫ (p + qx)² dx
        let (p, q, u, v) = (self.p, self.q, self.lo, self.hi);
        p * p * (v - u) + p * q * (v * v - u * u) + q * q * (v * v * v - u * u * u) / 3.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Representation {
    /// Piecewise-linear on a partition of `[0, 1]`.
    Pieces(Vec<LinearPiece>),
    /// Finite expansion in the given basis.
    Series { basis: Basis, coefficients: Vec<Complex64> },
}

/// A concrete deterministic field on `[0, 1]` together with its amplitude
/// bound and energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldDocument", into = "FieldDocument")]
pub struct FieldSpec {
    class: FieldClass,
    amplitude: f64,
    norm_sq: f64,
    repr: Representation,
}

impl FieldSpec {
    /// Field `Σ_{j<k} α_j φ_j` with `k = coefficients.len()`.
    pub fn finite_dim(basis: Basis, coefficients: Vec<Complex64>, a: f64) -> Result<Self, FieldError> {
        check_amplitude(a)?;
        if coefficients.is_empty() {
            return Err(FieldError::Empty);
        }
        if let Some(dimension) = basis.dimension() {
            if coefficients.len() > dimension {
                return Err(FieldError::TooManyCoefficients {
                    count: coefficients.len(),
                    dimension,
                });
            }
        }
        check_real(basis, &coefficients)?;
        let norm_sq = compensated_sum(coefficients.iter().map(|c| c.norm_sqr()));
        let k = coefficients.len();
        let repr = match basis {
            Basis::Step { cells } => {
                let width = 1.0 / cells as f64;
                let scale = (cells as f64).sqrt();
                let mut pieces: Vec<LinearPiece> = coefficients
                    .iter()
                    .enumerate()
                    .map(|(j, c)| LinearPiece::constant(j as f64 * width, (j + 1) as f64 * width, c.re * scale))
                    .collect();
                if k < cells {
                    pieces.push(LinearPiece::constant(k as f64 * width, 1.0, 0.0));
                }
                Representation::Pieces(pieces)
            }
            Basis::Fourier => Representation::Series { basis, coefficients },
        };
        let field = Self {
            class: FieldClass::FiniteDim { basis, k },
            amplitude: a,
            norm_sq,
            repr,
        };
        field.check_sup()?;
        Ok(field)
    }

    /// The identically zero field.
    pub fn zero(a: f64) -> Result<Self, FieldError> {
        Self::finite_dim(Basis::Fourier, vec![Complex64::new(0.0, 0.0)], a)
    }

    pub fn bounded_variation(shape: BvShape, a: f64) -> Result<Self, FieldError> {
        check_amplitude(a)?;
        let pieces = shape.segments();
        let norm_sq = compensated_sum(pieces.iter().map(LinearPiece::energy));
        let field = Self {
            class: FieldClass::BoundedVariation { shape },
            amplitude: a,
            norm_sq,
            repr: Representation::Pieces(pieces),
        };
        field.check_sup()?;
        let captured = compensated_sum(
            (0..J_TAIL).map(|j| field.coefficient(Basis::Fourier, j).norm_sqr()),
        );
        let residual = (norm_sq - captured).max(0.0);
        let limit = TAIL_TOLERANCE * norm_sq;
        if residual >= limit {
            return Err(FieldError::TailTooHeavy {
                terms: J_TAIL,
                residual,
                limit,
            });
        }
        Ok(field)
    }

    /// Real field with Fourier coefficient magnitudes
    /// `c0·(1 + k)^{-(s + 1/2 + δ)}` on the frequency pair `k`, random
    /// phases from `seed`, scaled so that `Σ|α_j| = a` (hence `sup|f| ≤ a`).
    pub fn sobolev(s: f64, seed: u64, a: f64) -> Result<Self, FieldError> {
        check_amplitude(a)?;
        if !(s > 0.5) || !s.is_finite() {
            return Err(FieldError::SmoothnessTooLow(s));
        }
        let exponent = s + 0.5 + SOBOLEV_DELTA;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coefficients = vec![Complex64::new(0.0, 0.0); SOBOLEV_TERMS];
        coefficients[0] = Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0);
        let mut k = 1;
        while 2 * k - 1 < SOBOLEV_TERMS {
            let magnitude = (1.0 + k as f64).powf(-exponent);
            let phase = 2.0 * PI * rng.random::<f64>();
            let value = Complex64::from_polar(magnitude, phase);
            coefficients[2 * k - 1] = value.conj();
            if 2 * k < SOBOLEV_TERMS {
                coefficients[2 * k] = value;
            } else {
                // unpaired top index: keep the field real
                coefficients[2 * k - 1] = Complex64::new(0.0, 0.0);
            }
            k += 1;
        }
        let l1 = compensated_sum(coefficients.iter().map(|c| c.norm()));
        let scale = a * (1.0 - 1e-9) / l1;
        for c in &mut coefficients {
            *c *= scale;
        }
        let norm_sq = compensated_sum(coefficients.iter().map(|c| c.norm_sqr()));
        Ok(Self {
            class: FieldClass::Sobolev { s, seed },
            amplitude: a,
            norm_sq,
            repr: Representation::Series {
                basis: Basis::Fourier,
                coefficients,
            },
        })
    }

    pub fn class(&self) -> &FieldClass {
        &self.class
    }

    /// Amplitude bound `a`.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `‖f‖²` on `[0, 1]`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// Defining coefficients of series-backed fields.
    pub fn series(&self) -> Option<(Basis, &[Complex64])> {
        match &self.repr {
            Representation::Series { basis, coefficients } => Some((*basis, coefficients)),
            Representation::Pieces(_) => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.repr {
            Representation::Pieces(pieces) => {
                let idx = pieces.partition_point(|p| p.hi <= x).min(pieces.len() - 1);
                pieces[idx].at(x)
            }
            Representation::Series {
                basis: Basis::Fourier,
                coefficients,
            } => eval_real_fourier(coefficients, x),
            Representation::Series { basis, coefficients } => basis.synthesize(coefficients, x).re,
        }
    }

    /// Discontinuities of the field and of its periodic extension.
    pub fn jump_points(&self) -> Vec<f64> {
        match &self.repr {
            Representation::Series { .. } => Vec::new(),
            Representation::Pieces(pieces) => {
                let mut jumps = Vec::new();
                for w in pieces.windows(2) {
                    if (w[0].at(w[0].hi) - w[1].at(w[1].lo)).abs() > 1e-12 {
                        jumps.push(w[0].hi);
                    }
                }
                let first = pieces.first().expect("non-empty partition");
                let last = pieces.last().expect("non-empty partition");
                if (first.at(0.0) - last.at(1.0)).abs() > 1e-12 {
                    jumps.insert(0, 0.0);
                    jumps.push(1.0);
                }
                jumps
            }
        }
    }

    /// Interior points where the field is not smooth (quadrature breakpoints).
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.repr {
            Representation::Pieces(pieces) => pieces.iter().skip(1).map(|p| p.lo).collect(),
            Representation::Series { basis, coefficients } => match basis {
                Basis::Fourier => Vec::new(),
                Basis::Step { cells } => (1..(*cells).min(coefficients.len() + 1))
                    .map(|i| i as f64 / *cells as f64)
                    .collect(),
            },
        }
    }

    /// `⟨f, φ_j⟩` for `basis`, in closed form.
    pub fn coefficient(&self, basis: Basis, j: usize) -> Complex64 {
        match &self.repr {
            Representation::Pieces(pieces) => pieces
                .iter()
                .map(|pc| basis.linear_moment(j, pc.lo, pc.hi, pc.p, pc.q))
                .sum(),
            Representation::Series {
                basis: native,
                coefficients,
            } => {
                if *native == basis {
                    return coefficients.get(j).copied().unwrap_or_default();
                }
                match (*native, basis) {
                    // ⟨Σ α_l φ_l, ψ_j⟩ = √K Σ α_l ∫_cell φ_l
                    (Basis::Fourier, Basis::Step { cells }) => {
                        if j >= cells {
                            return Complex64::default();
                        }
                        let k = cells as f64;
                        let (lo, hi) = (j as f64 / k, (j + 1) as f64 / k);
                        coefficients
                            .iter()
                            .enumerate()
                            .map(|(l, a)| a * Basis::Fourier.linear_moment(l, lo, hi, 1.0, 0.0).conj())
                            .sum::<Complex64>()
                            * k.sqrt()
                    }
                    // other pairs are never constructed: step-native fields are pieces
                    _ => unreachable!("series fields are Fourier-native"),
                }
            }
        }
    }

    fn check_sup(&self) -> Result<(), FieldError> {
        let sup = match &self.repr {
            Representation::Pieces(pieces) => pieces
                .iter()
                .map(|pc| pc.at(pc.lo).abs().max(pc.at(pc.hi).abs()))
                .fold(0.0, f64::max),
            Representation::Series { basis, coefficients } => {
                let beta = basis.amplitude_bound().unwrap_or(f64::INFINITY);
                let l1 = compensated_sum(coefficients.iter().map(|c| c.norm())) * beta;
                if l1 <= self.amplitude {
                    l1
                } else {
                    (0..=AMPLITUDE_GRID)
                        .map(|i| self.eval(i as f64 / AMPLITUDE_GRID as f64).abs())
                        .fold(0.0, f64::max)
                }
            }
        };
        if sup > self.amplitude * (1.0 + 1e-12) {
            return Err(FieldError::AmplitudeExceeded {
                sup,
                a: self.amplitude,
            });
        }
        Ok(())
    }

    /// `‖f‖²` by adaptive quadrature, independent of the closed forms.
    pub fn norm_sq_by_quadrature(&self) -> Result<f64, crate::quadrature::QuadratureError> {
        let breaks = self.breakpoints();
        let opts = QuadOptions {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_segments: 200_000,
        };
        integrate_real(|x| self.eval(x).powi(2), 0.0, 1.0, &breaks, opts)
    }
}

fn check_amplitude(a: f64) -> Result<(), FieldError> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(FieldError::InvalidAmplitude(a))
    }
}

fn check_real(basis: Basis, coefficients: &[Complex64]) -> Result<(), FieldError> {
    match basis {
        Basis::Step { .. } => {
            if let Some(index) = coefficients.iter().position(|c| c.im.abs() > SYMMETRY_TOL) {
                return Err(FieldError::NotReal { index });
            }
        }
        Basis::Fourier => {
            if coefficients[0].im.abs() > SYMMETRY_TOL {
                return Err(FieldError::NotReal { index: 0 });
            }
            let mut k = 1;
            while 2 * k - 1 < coefficients.len() {
                let minus = coefficients[2 * k - 1];
                let plus = coefficients.get(2 * k).copied().unwrap_or_default();
                if (minus - plus.conj()).norm() > SYMMETRY_TOL {
                    return Err(FieldError::NotReal { index: 2 * k - 1 });
                }
                k += 1;
            }
        }
    }
    Ok(())
}

/// `α_0 + 2·Re Σ_k α_{2k} e^{2πikx}` for conjugate-symmetric coefficients.
fn eval_real_fourier(coefficients: &[Complex64], x: f64) -> f64 {
    let m = coefficients.len();
    let pairs = (m - 1) / 2;
    let z = Complex64::from_polar(1.0, 2.0 * PI * x);
    // Σ_{k=1}^{pairs} α_{2k} z^k = z Σ_r z^r A_r(z⁴) with k = 4q + r + 1,
    // as four independent Horner chains
    let z4 = (z * z) * (z * z);
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = [zero; 4];
    for q in (0..pairs.div_ceil(4)).rev() {
        for (r, a) in acc.iter_mut().enumerate() {
            let k = 4 * q + r + 1;
            let c = if k <= pairs { coefficients[2 * k] } else { zero };
            *a = *a * z4 + c;
        }
    }
    let inner = acc[0] + z * (acc[1] + z * (acc[2] + z * acc[3]));
    coefficients[0].re + 2.0 * (z * inner).re
}

/// Serialised form of a [`FieldSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDocument {
    #[serde(flatten)]
    pub class: FieldClass,
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Complex64>>,
}

impl TryFrom<FieldDocument> for FieldSpec {
    type Error = FieldError;

    fn try_from(doc: FieldDocument) -> Result<Self, FieldError> {
        match doc.class {
            FieldClass::FiniteDim { basis, k } => {
                let coefficients = doc.coefficients.unwrap_or_default();
                if coefficients.len() != k {
                    return Err(FieldError::CountMismatch {
                        k,
                        got: coefficients.len(),
                    });
                }
                FieldSpec::finite_dim(basis, coefficients, doc.a)
            }
            FieldClass::BoundedVariation { shape } => FieldSpec::bounded_variation(shape, doc.a),
            FieldClass::Sobolev { s, seed } => FieldSpec::sobolev(s, seed, doc.a),
        }
    }
}

impl From<FieldSpec> for FieldDocument {
    fn from(field: FieldSpec) -> Self {
        Self::from(&field)
    }
}

impl From<&FieldSpec> for FieldDocument {
    fn from(field: &FieldSpec) -> Self {
        let coefficients = match (&field.class, &field.repr) {
            (FieldClass::FiniteDim { .. }, Representation::Series { coefficients, .. }) => {
                Some(coefficients.clone())
            }
            (FieldClass::FiniteDim { basis, k }, Representation::Pieces(_)) => {
                Some((0..*k).map(|j| field.coefficient(*basis, j)).collect())
            }
            _ => None,
        };
        FieldDocument {
            class: field.class.clone(),
            a: field.amplitude,
            coefficients,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn finite_dim_eval_matches_synthesis() {
        let coeffs = vec![c(0.1, 0.0), c(0.2, -0.15), c(0.2, 0.15), c(0.1, 0.15), c(0.1, -0.15)];
        let field = FieldSpec::finite_dim(Basis::Fourier, coeffs.clone(), 1.0).unwrap();
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let synth = Basis::Fourier.synthesize(&coeffs, x);
            assert!(synth.im.abs() < 1e-12);
            assert!((field.eval(x) - synth.re).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_real_coefficients() {
        let err = FieldSpec::finite_dim(Basis::Fourier, vec![c(0.0, 0.0), c(0.5, 0.0), c(0.2, 0.0)], 1.0)
            .unwrap_err();
        assert_eq!(err, FieldError::NotReal { index: 1 });
        let err = FieldSpec::finite_dim(Basis::Fourier, vec![c(0.0, 0.1)], 1.0).unwrap_err();
        assert_eq!(err, FieldError::NotReal { index: 0 });
    }

    #[test]
    fn rejects_amplitude_violation() {
        let err = FieldSpec::finite_dim(Basis::Fourier, vec![c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0)], 0.9)
            .unwrap_err();
        assert!(matches!(err, FieldError::AmplitudeExceeded { .. }));
        assert!(FieldSpec::bounded_variation(BvShape::UnitStep, 0.5).is_err());
        assert!(FieldSpec::bounded_variation(BvShape::Sawtooth, 0.5).is_ok());
    }

    #[test]
    fn sobolev_rejects_low_smoothness() {
        assert_eq!(FieldSpec::sobolev(0.5, 1, 1.0).unwrap_err(), FieldError::SmoothnessTooLow(0.5));
    }

    #[test]
    fn sobolev_is_real_and_bounded() {
        let field = FieldSpec::sobolev(2.0, 9, 1.0).unwrap();
        let (_, coeffs) = field.series().unwrap();
        for k in 1..100 {
            assert!((coeffs[2 * k - 1] - coeffs[2 * k].conj()).norm() < 1e-15);
        }
        for i in 0..=2000 {
            let x = i as f64 / 2000.0;
            let synth = Basis::Fourier.synthesize(coeffs, x);
            assert!(synth.im.abs() < 1e-10);
            assert!(field.eval(x).abs() <= 1.0);
        }
    }

    #[test]
    fn step_basis_field_is_piecewise_constant() {
        let field = FieldSpec::finite_dim(Basis::Step { cells: 4 }, vec![c(0.5, 0.0), c(-0.25, 0.0)], 1.0)
            .unwrap();
        assert_eq!(field.eval(0.1), 1.0);
        assert_eq!(field.eval(0.3), -0.5);
        assert_eq!(field.eval(0.8), 0.0);
        assert!((field.norm_sq() - 0.3125).abs() < 1e-15);
        assert!((field.coefficient(Basis::Step { cells: 4 }, 1) - c(-0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn jump_points() {
        let step = FieldSpec::bounded_variation(BvShape::UnitStep, 1.0).unwrap();
        assert_eq!(step.jump_points(), vec![0.0, 0.5, 1.0]);
        let saw = FieldSpec::bounded_variation(BvShape::Sawtooth, 0.5).unwrap();
        assert_eq!(saw.jump_points(), vec![0.0, 1.0]);
    }

    #[test]
    fn document_round_trip() {
        let json = r#"{"class":"finite_dim","params":{"basis":{"kind":"fourier"},"k":3},"a":1.0,
                       "coefficients":[[0.1,0.0],[0.2,-0.1],[0.2,0.1]]}"#;
        let doc: FieldDocument = serde_json::from_str(json).unwrap();
        let field = FieldSpec::try_from(doc.clone()).unwrap();
        assert_eq!(FieldDocument::from(&field), doc);

        let json = r#"{"class":"sobolev","params":{"s":1.0,"seed":1},"a":1.0}"#;
        let doc: FieldDocument = serde_json::from_str(json).unwrap();
        let field = FieldSpec::try_from(doc).unwrap();
        let again: FieldDocument = serde_json::from_str(&serde_json::to_string(&FieldDocument::from(&field)).unwrap()).unwrap();
        assert_eq!(FieldSpec::try_from(again).unwrap(), field);

        let bad = r#"{"class":"finite_dim","params":{"k":2},"a":1.0,"coefficients":[[0.1,0.0]]}"#;
        let doc: FieldDocument = serde_json::from_str(bad).unwrap();
        assert_eq!(FieldSpec::try_from(doc).unwrap_err(), FieldError::CountMismatch { k: 2, got: 1 });
    }
}
