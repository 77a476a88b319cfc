use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const REANCHOR: usize = 64;

/// Orthonormal systems on `[0, 1]`.
///
/// `Fourier` is the complex exponential system ordered by alternating
/// frequency sign: `φ_0 = 1`, even `j` gives `exp(+iπjx)`, odd `j` gives
/// `exp(-iπ(j+1)x)`, so indices `(2k-1, 2k)` hold the frequency pair `∓2πk`.
///
/// `Step` is the normalised indicator system of `cells` equal cells, a
/// finite orthonormal set spanning piecewise-constant functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    #[default]
    Fourier,
    Step { cells: usize },
}

impl Basis {
    /// Angular frequency `θ_j` with `φ_j(x) = exp(iθ_j x)` for the Fourier system.
    #[inline]
    pub fn fourier_frequency(j: usize) -> f64 {
        if j.is_multiple_of(2) {
            PI * j as f64
        } else {
            -PI * (j + 1) as f64
        }
    }

    /// Number of basis functions, `None` for the infinite Fourier system.
    pub fn dimension(&self) -> Option<usize> {
        match *self {
            Basis::Fourier => None,
            Basis::Step { cells } => Some(cells),
        }
    }

    /// Uniform amplitude bound `β` with `|φ_j(x)| ≤ β`.
    pub fn amplitude_bound(&self) -> Option<f64> {
        match *self {
            Basis::Fourier => Some(1.0),
            Basis::Step { cells } => Some((cells as f64).sqrt()),
        }
    }

    /// True when `|φ_j(x)| = 1` everywhere for every `j`.
    pub fn unit_modulus(&self) -> bool {
        matches!(self, Basis::Fourier)
    }

    /// Cell index of `x` for the step system; `x = 1` belongs to the last cell.
    #[inline]
    fn cell_of(cells: usize, x: f64) -> usize {
        ((x * cells as f64).floor().max(0.0) as usize).min(cells - 1)
    }

    pub fn eval(&self, j: usize, x: f64) -> Complex64 {
        match *self {
            Basis::Fourier => Complex64::from_polar(1.0, Self::fourier_frequency(j) * x),
            Basis::Step { cells } => {
                if j < cells && Self::cell_of(cells, x) == j {
                    Complex64::new((cells as f64).sqrt(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    }

    /// Points in `(0, 1)` where `φ_j` is discontinuous.
    pub fn breakpoints(&self, j: usize) -> Vec<f64> {
        match *self {
            Basis::Fourier => Vec::new(),
            Basis::Step { cells } => {
                if j >= cells {
                    return Vec::new();
                }
                let k = cells as f64;
                [j as f64 / k, (j + 1) as f64 / k]
                    .into_iter()
                    .filter(|&b| b > 0.0 && b < 1.0)
                    .collect()
            }
        }
    }

    /// Writes `conj(φ_j(x))` for `j < out.len()`.
    pub fn fill_conj(&self, x: f64, out: &mut [Complex64]) {
        match *self {
            Basis::Fourier => {
                let m = out.len();
                if m == 0 {
                    return;
                }
                out[0] = Complex64::new(1.0, 0.0);
                // conj φ_{2k} = w^k, conj φ_{2k-1} = conj(w^k), w = exp(-2πix)
                let step = Complex64::from_polar(1.0, -2.0 * PI * x);
                let mut power = Complex64::new(1.0, 0.0);
                let mut k = 1;
                while 2 * k - 1 < m {
                    power = if k % REANCHOR == 0 {
                        Complex64::from_polar(1.0, -2.0 * PI * k as f64 * x)
                    } else {
                        power * step
                    };
                    out[2 * k - 1] = power.conj();
                    if 2 * k < m {
                        out[2 * k] = power;
                    }
                    k += 1;
                }
            }
            Basis::Step { cells } => {
                out.fill(Complex64::new(0.0, 0.0));
                let cell = Self::cell_of(cells, x);
                if cell < out.len() {
                    out[cell] = Complex64::new((cells as f64).sqrt(), 0.0);
                }
            }
        }
    }

    /// `Σ_{j < coeffs.len()} coeffs[j]·φ_j(x)`.
    pub fn synthesize(&self, coeffs: &[Complex64], x: f64) -> Complex64 {
        match *self {
            Basis::Fourier => {
                let m = coeffs.len();
                if m == 0 {
                    return Complex64::new(0.0, 0.0);
                }
                let mut acc = coeffs[0];
                let step = Complex64::from_polar(1.0, 2.0 * PI * x);
                let mut power = Complex64::new(1.0, 0.0);
                let mut k = 1;
                while 2 * k - 1 < m {
                    power = if k % REANCHOR == 0 {
                        Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x)
                    } else {
                        power * step
                    };
                    acc += coeffs[2 * k - 1] * power.conj();
                    if 2 * k < m {
                        acc += coeffs[2 * k] * power;
                    }
                    k += 1;
                }
                acc
            }
            Basis::Step { cells } => {
                let cell = Self::cell_of(cells, x);
                coeffs
                    .get(cell)
                    .map(|c| c * (cells as f64).sqrt())
                    .unwrap_or_default()
            }
        }
    }

    /// `∫_u^v (p + q·x)·conj(φ_j(x)) dx` in closed form.
    pub fn linear_moment(&self, j: usize, u: f64, v: f64, p: f64, q: f64) -> Complex64 {
        match *self {
            Basis::Fourier => exp_linear_moment(-Self::fourier_frequency(j), u, v, p, q),
            Basis::Step { cells } => {
                if j >= cells {
                    return Complex64::new(0.0, 0.0);
                }
                let k = cells as f64;
                let lo = u.max(j as f64 / k);
                let hi = v.min((j + 1) as f64 / k);
                if hi <= lo {
                    return Complex64::new(0.0, 0.0);
                }
                let integral = p * (hi - lo) + 0.5 * q * (hi * hi - lo * lo);
                Complex64::new(k.sqrt() * integral, 0.0)
            }
        }
    }
}

/// `∫_u^v (p + q·x)·exp(iθx) dx`.
pub(crate) fn exp_linear_moment(theta: f64, u: f64, v: f64, p: f64, q: f64) -> Complex64 {
    if theta == 0.0 {
        return Complex64::new(p * (v - u) + 0.5 * q * (v * v - u * u), 0.0);
    }
    let lambda = Complex64::new(0.0, theta);
    let eu = Complex64::from_polar(1.0, theta * u);
    let ev = Complex64::from_polar(1.0, theta * v);
    // ∫ e^{λx} = e^{λx}/λ ;  ∫ x e^{λx} = e^{λx}(x/λ - 1/λ²)
    let constant = (ev - eu) / lambda;
    let linear = ev * (v / lambda - 1.0 / (lambda * lambda)) - eu * (u / lambda - 1.0 / (lambda * lambda));
    constant * p + linear * q
}
