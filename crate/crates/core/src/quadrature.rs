//! Adaptive Gauss–Kronrod (G7/K15) quadrature on finite intervals.
//!
//! Integrands are complex-valued; the real case goes through
//! [`integrate_real`]. The interval list is refined globally: the segment with
//! the largest error estimate is bisected until the summed estimate falls
//! below the requested absolute tolerance.

use num_complex::Complex64;
use thiserror::Error;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e} after {segments} segments")]
    NoConvergence {
        achieved: f64,
        requested: f64,
        segments: usize,
    },
    #[error("integrand produced a non-finite value near x = {at}")]
    NonFinite { at: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
}

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_segments: 4000,
        }
    }
}

impl QuadOptions {
    pub fn abs(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub segments: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
}

fn kronrod15<F>(f: &F, lo: f64, hi: f64) -> Result<Segment, QuadratureError>
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    if !(fc.re.is_finite() && fc.im.is_finite()) {
        return Err(QuadratureError::NonFinite { at: center });
    }
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for k in 0..7 {
        let dx = half * XGK[k];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        if !(f1.re.is_finite() && f1.im.is_finite() && f2.re.is_finite() && f2.im.is_finite()) {
            return Err(QuadratureError::NonFinite { at: center - dx });
        }
        let pair = f1 + f2;
        kronrod += pair * WGK[k];
        if k % 2 == 1 {
            gauss += pair * WG[k / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    Ok(Segment {
        lo,
        hi,
        value,
        error,
    })
}

/// Integrates a complex integrand over `[lo, hi]`.
///
/// `breaks` are optional interior points where the integrand is known to be
/// non-smooth; they seed the initial partition.
pub fn integrate<F>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult, QuadratureError>
where
    F: Fn(f64) -> Complex64,
{
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(QuadratureError::InvalidInterval { lo, hi });
    }
    if hi == lo {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            segments: 0,
        });
    }
    let mut points: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| b > lo && b < hi)
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    points.insert(0, lo);
    points.push(hi);

    let mut segments = Vec::with_capacity(64);
    for w in points.windows(2) {
        segments.push(kronrod15(&f, w[0], w[1])?);
    }

    loop {
        let value: Complex64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * value.norm());
        if error <= target {
            return Ok(QuadResult {
                value,
                error,
                segments: segments.len(),
            });
        }
        if segments.len() >= opts.max_segments {
            return Err(QuadratureError::NoConvergence {
                achieved: error,
                requested: target,
                segments: segments.len(),
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            // interval exhausted at machine precision
            return Err(QuadratureError::NoConvergence {
                achieved: error,
                requested: target,
                segments: segments.len() + 1,
            });
        }
        segments.push(kronrod15(&f, seg.lo, mid)?);
        segments.push(kronrod15(&f, mid, seg.hi)?);
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), lo, hi, breaks, opts).map(|r| r.value.re)
}
