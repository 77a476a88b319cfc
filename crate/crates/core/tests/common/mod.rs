//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// Fourier system written out directly: φ₀ = 1, even j → e^{iπjx},
/// odd j → e^{−iπ(j+1)x}.
pub fn phi(j: usize, x: f64) -> Complex64 {
    if j == 0 {
        Complex64::new(1.0, 0.0)
    } else if j.is_multiple_of(2) {
        Complex64::from_polar(1.0, PI * j as f64 * x)
    } else {
        Complex64::from_polar(1.0, -PI * (j + 1) as f64 * x)
    }
}

/// Composite Simpson on `[lo, hi]` with `panels` (even) sub-intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    assert!(panels.is_multiple_of(2));
    let h = (hi - lo) / panels as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

/// Simpson over consecutive pieces delimited by `cuts` (which include 0 and 1).
/// Each piece is integrated on a slightly shrunken interval so that
/// one-sided limits are used at the cuts.
pub fn simpson_pieces<F: Fn(f64) -> f64>(f: F, cuts: &[f64], panels: usize) -> f64 {
    cuts.windows(2)
        .map(|w| {
            let eps = 1e-13;
            simpson(&f, w[0] + eps, w[1] - eps, panels)
        })
        .sum()
}

/// `⟨x − 1/2, φ_j⟩`.
pub fn sawtooth_alpha(j: usize) -> Complex64 {
    if j == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let k = j.div_ceil(2) as f64;
    let v = Complex64::new(0.0, 1.0 / (2.0 * PI * k));
    if j.is_multiple_of(2) {
        v
    } else {
        v.conj()
    }
}

/// `⟨1[x ≥ 1/2], φ_j⟩`.
pub fn unit_step_alpha(j: usize) -> Complex64 {
    if j == 0 {
        return Complex64::new(0.5, 0.0);
    }
    let k = j.div_ceil(2);
    if k.is_multiple_of(2) {
        return Complex64::new(0.0, 0.0);
    }
    let v = Complex64::new(0.0, 1.0 / (PI * k as f64));
    if j.is_multiple_of(2) {
        v
    } else {
        v.conj()
    }
}

/// Coefficients of the shipped five-term field.
pub fn k5_alpha() -> Vec<Complex64> {
    let a1 = Complex64::new(0.2, -0.15);
    let a3 = Complex64::new(0.1, 0.15);
    vec![Complex64::new(0.1, 0.0), a1, a1.conj(), a3, a3.conj()]
}

/// Smallest integer `m ≥ 1` with `m^p ≥ n`.
pub fn int_root_ceil(n: u64, p: u32) -> u64 {
    let mut m = 1u64;
    while m.pow(p) < n {
        m += 1;
    }
    m
}
