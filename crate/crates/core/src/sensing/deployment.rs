use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SensingError;

/// Cells used by [`DeploymentDensity::tabulated`].
pub const TABLE_CELLS: usize = 1 << 12;

/// Sensor-location density `p_X` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeploymentDensity {
    Uniform,
    /// `p(x) = 2x`; zero infimum at the left endpoint.
    Linear2x,
    /// `p(x) = ν + 2(1 − ν)x` with `ν ∈ (0, 1]`.
    AffineFloor { nu: f64 },
    /// Piecewise-constant density on equal cells.
    Custom { weights: Tabulated },
}

/// Normalised piecewise-constant density with its cumulative table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Tabulated {
    density: Vec<f64>,
    cdf: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Tabulated {
    type Error = SensingError;

    fn try_from(weights: Vec<f64>) -> Result<Self, SensingError> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(SensingError::InvalidDensity("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(SensingError::InvalidDensity("weights sum to zero".into()));
        }
        let cells = weights.len() as f64;
        let density: Vec<f64> = weights.iter().map(|w| w * cells / total).collect();
        let mut cdf = Vec::with_capacity(weights.len() + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in &weights {
            acc += w / total;
            cdf.push(acc);
        }
        *cdf.last_mut().expect("non-empty") = 1.0;
        Ok(Self { density, cdf })
    }
}

impl From<Tabulated> for Vec<f64> {
    fn from(t: Tabulated) -> Self {
        t.density
    }
}

impl Tabulated {
    pub fn cells(&self) -> usize {
        self.density.len()
    }

    fn cell_of(&self, x: f64) -> usize {
        ((x * self.cells() as f64).floor().max(0.0) as usize).min(self.cells() - 1)
    }

    fn pdf(&self, x: f64) -> f64 {
        self.density[self.cell_of(x)]
    }

    fn cdf(&self, x: f64) -> f64 {
        let k = self.cells() as f64;
        let cell = self.cell_of(x);
        self.cdf[cell] + (x - cell as f64 / k) * self.density[cell]
    }

    /// Inverse CDF by linear interpolation of the cumulative table.
    fn quantile(&self, u: f64) -> f64 {
        let k = self.cells() as f64;
        let idx = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cells());
        let (lo, hi) = (self.cdf[idx - 1], self.cdf[idx]);
        let frac = if hi > lo { (u - lo) / (hi - lo) } else { 0.0 };
        ((idx - 1) as f64 + frac) / k
    }

    fn infimum(&self) -> f64 {
        self.density.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Cell edges and density values.
    pub fn cells_with_density(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let k = self.cells() as f64;
        self.density
            .iter()
            .enumerate()
            .map(move |(i, &d)| (i as f64 / k, (i + 1) as f64 / k, d))
    }
}

impl DeploymentDensity {
    /// Tabulates a non-negative function at the midpoints of [`TABLE_CELLS`] cells.
    pub fn tabulated(f: impl Fn(f64) -> f64) -> Result<Self, SensingError> {
        let k = TABLE_CELLS as f64;
        let weights: Vec<f64> = (0..TABLE_CELLS).map(|i| f((i as f64 + 0.5) / k)).collect();
        Ok(Self::Custom {
            weights: Tabulated::try_from(weights)?,
        })
    }

    pub fn validate(&self) -> Result<(), SensingError> {
        match self {
            DeploymentDensity::AffineFloor { nu } if !(*nu > 0.0 && *nu <= 1.0) => Err(
                SensingError::InvalidDensity(format!("affine floor needs ν in (0, 1], got {nu}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        match self {
            DeploymentDensity::Uniform => 1.0,
            DeploymentDensity::Linear2x => 2.0 * x,
            DeploymentDensity::AffineFloor { nu } => nu + 2.0 * (1.0 - nu) * x,
            DeploymentDensity::Custom { weights } => weights.pdf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self {
            DeploymentDensity::Uniform => x,
            DeploymentDensity::Linear2x => x * x,
            DeploymentDensity::AffineFloor { nu } => nu * x + (1.0 - nu) * x * x,
            DeploymentDensity::Custom { weights } => weights.cdf(x),
        }
    }

    /// `ν = inf_{[0,1]} p_X`.
    pub fn infimum(&self) -> f64 {
        match self {
            DeploymentDensity::Uniform => 1.0,
            DeploymentDensity::Linear2x => 0.0,
            DeploymentDensity::AffineFloor { nu } => *nu,
            DeploymentDensity::Custom { weights } => weights.infimum(),
        }
    }

    /// Points in `(0, 1)` where the density is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            DeploymentDensity::Custom { weights } => {
                let k = weights.cells();
                (1..k).map(|i| i as f64 / k as f64).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Inverse-CDF map of a uniform variate on `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let x = match self {
            DeploymentDensity::Uniform => u,
            DeploymentDensity::Linear2x => u.sqrt(),
            // root of (1-ν)x² + νx − u = 0 in cancellation-free form
            DeploymentDensity::AffineFloor { nu } => {
                2.0 * u / (nu + (nu * nu + 4.0 * (1.0 - nu) * u).sqrt())
            }
            DeploymentDensity::Custom { weights } => weights.quantile(u),
        };
        x.clamp(0.0, 1.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    pub fn name(&self) -> String {
        match self {
            DeploymentDensity::Uniform => "uniform".into(),
            DeploymentDensity::Linear2x => "linear2x".into(),
            DeploymentDensity::AffineFloor { nu } => format!("affine_floor(nu={nu})"),
            DeploymentDensity::Custom { weights } => format!("custom({} cells)", weights.cells()),
        }
    }
}
