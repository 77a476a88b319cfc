use serde::{Deserialize, Serialize};

/// Truncation rule `m(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// Constant `m`.
    Fixed { m: usize },
    /// `m = k` for a field known to live in a `k`-dimensional span.
    FiniteDim { k: usize },
    /// `m = ⌈√n⌉`.
    Bv,
    /// `m = ⌈n^{1/(2s+1)}⌉`.
    Sobolev { s: f64 },
    /// `m = ⌈n^ψ⌉`.
    Power { psi: f64 },
}

impl Schedule {
    pub fn resolve(&self, n: usize) -> usize {
        let n = n.max(1);
        let m = match *self {
            Schedule::Fixed { m } => m,
            Schedule::FiniteDim { k } => k,
            Schedule::Bv => ceil_power(n, 0.5),
            Schedule::Sobolev { s } => ceil_power(n, 1.0 / (2.0 * s + 1.0)),
            Schedule::Power { psi } => ceil_power(n, psi),
        };
        m.max(1)
    }

    /// Exponent `ψ` of `m(n) ~ n^ψ`, zero for bounded schedules.
    pub fn growth_exponent(&self) -> f64 {
        match *self {
            Schedule::Fixed { .. } | Schedule::FiniteDim { .. } => 0.0,
            Schedule::Bv => 0.5,
            Schedule::Sobolev { s } => 1.0 / (2.0 * s + 1.0),
            Schedule::Power { psi } => psi,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Schedule::Fixed { m } => format!("fixed(m={m})"),
            Schedule::FiniteDim { k } => format!("finite_dim(k={k})"),
            Schedule::Bv => "bv(ceil(sqrt n))".into(),
            Schedule::Sobolev { s } => format!("sobolev(s={s})"),
            Schedule::Power { psi } => format!("power(psi={psi})"),
        }
    }
}

/// `⌈n^ψ⌉`, snapping values within rounding distance of an integer.
fn ceil_power(n: usize, psi: f64) -> usize {
    let r = if psi == 0.5 {
        (n as f64).sqrt()
    } else {
        (n as f64).powf(psi)
    };
    let nearest = r.round();
    if (r - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        r.ceil() as usize
    }
}
