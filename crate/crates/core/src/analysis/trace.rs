use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::conditions::{validate_as_schedule, AsScheduleReport};
use super::AnalysisError;
use crate::estimator::{CoefficientAccumulator, Schedule};
use crate::field_model::{true_coefficients, Basis, FieldSpec};
use crate::rng::TrialSeed;
use crate::sensing::{DeploymentDensity, NoiseModel, SensorStream};

/// Statement attached to every trace.
pub const SINGLE_PATH_NOTE: &str = "single fixed-seed sample path: a decreasing trajectory is a regression \
check and does not establish almost-sure convergence";

/// Inputs of a sample-path trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSetup {
    pub field: FieldSpec,
    pub basis: Basis,
    pub deploy: DeploymentDensity,
    pub noise: NoiseModel,
    /// Usually `Power { psi }`; `Fixed` freezes `m`.
    pub schedule: Schedule,
    /// Exponent of `Λ_m = m^{γ/2}` used in the condition report.
    pub gamma: f64,
    pub seed: u64,
    pub checkpoints: Vec<usize>,
    /// Number of equispaced evaluation points on `[0, 1]`.
    pub eval_points: usize,
    /// Half-width of the neighbourhood of each jump excluded from `sup_error_off_jumps`.
    pub jump_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceCheckpoint {
    pub n: usize,
    pub m: usize,
    /// `max_x |f̂_{n,m}(x) − f_m(x)|`
    pub sup_s: f64,
    /// `max_x |f̂_{n,m}(x) − f(x)|`
    pub sup_error: f64,
    /// As `sup_error`, skipping points within `jump_margin` of a jump.
    pub sup_error_off_jumps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsTraceResult {
    pub seed: u64,
    pub schedule: Schedule,
    pub gamma: f64,
    pub checkpoints: Vec<TraceCheckpoint>,
    pub condition_report: AsScheduleReport,
    pub note: String,
}

impl AsTraceResult {
    pub fn n_checkpoints(&self) -> Vec<usize> {
        self.checkpoints.iter().map(|c| c.n).collect()
    }

    pub fn sup_s(&self) -> Vec<f64> {
        self.checkpoints.iter().map(|c| c.sup_s).collect()
    }

    /// Last over first `sup_s`.
    pub fn decay_ratio(&self) -> Option<f64> {
        let first = self.checkpoints.first()?;
        let last = self.checkpoints.last()?;
        Some(last.sup_s / first.sup_s)
    }
}

/// Follows one nested sample path (`TrialSeed::new(seed, 0)`) and records the
/// sup-norm errors at each checkpoint.
pub fn as_error_trace(setup: &TraceSetup) -> Result<AsTraceResult, AnalysisError> {
    if setup.checkpoints.is_empty() || setup.checkpoints.windows(2).any(|w| w[1] <= w[0]) || setup.checkpoints[0] == 0 {
        return Err(AnalysisError::InvalidInput("checkpoints must be positive and strictly increasing".into()));
    }
    if setup.eval_points < 2 {
        return Err(AnalysisError::InvalidInput("eval_points must be at least 2".into()));
    }
    let ms: Vec<usize> = setup.checkpoints.iter().map(|&n| setup.schedule.resolve(n)).collect();
    let capacity = ms.iter().copied().max().unwrap_or(1);
    let truth = true_coefficients(&setup.field, setup.basis, capacity)?;
    let c = setup.field.amplitude() + setup.noise.bound();
    let mut acc = CoefficientAccumulator::new(setup.basis, setup.deploy.clone(), c, capacity)?;
    let mut stream = SensorStream::new(&setup.field, &setup.deploy, setup.noise, TrialSeed::new(setup.seed, 0));

    let grid: Vec<f64> = (0..setup.eval_points)
        .map(|i| i as f64 / (setup.eval_points - 1) as f64)
        .collect();
    let jumps = setup.field.jump_points();
    let near_jump: Vec<bool> = grid
        .iter()
        .map(|x| jumps.iter().any(|j| (x - j).abs() <= setup.jump_margin))
        .collect();
    let field_values: Vec<f64> = grid.iter().map(|&x| setup.field.eval(x)).collect();

    let mut checkpoints = Vec::with_capacity(ms.len());
    for (&n, &m) in setup.checkpoints.iter().zip(&ms) {
        let have = acc.count();
        let batch = stream.extend_to(n);
        acc.push_batch(&batch.x[have..], &batch.b[have..])?;
        let hat = acc.snapshot(m)?;
        let diff: Vec<Complex64> = hat.values.iter().zip(&truth.values).map(|(h, a)| h - a).collect();
        let mut sup_s: f64 = 0.0;
        let mut sup_error: f64 = 0.0;
        let mut sup_off: f64 = 0.0;
        for ((&x, &fx), &skip) in grid.iter().zip(&field_values).zip(&near_jump) {
            sup_s = sup_s.max(setup.basis.synthesize(&diff, x).norm());
            let e = (setup.basis.synthesize(&hat.values, x) - fx).norm();
            sup_error = sup_error.max(e);
            if !skip {
                sup_off = sup_off.max(e);
            }
        }
        checkpoints.push(TraceCheckpoint {
            n,
            m,
            sup_s,
            sup_error,
            sup_error_off_jumps: sup_off,
        });
    }

    let condition_report = validate_as_schedule(
        setup.schedule.growth_exponent(),
        setup.gamma,
        setup.basis,
        &setup.deploy,
        std::slice::from_ref(&setup.field),
    );
    Ok(AsTraceResult {
        seed: setup.seed,
        schedule: setup.schedule,
        gamma: setup.gamma,
        checkpoints,
        condition_report,
        note: SINGLE_PATH_NOTE.to_string(),
    })
}
