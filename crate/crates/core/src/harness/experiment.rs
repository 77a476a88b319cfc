use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::HarnessError;
use crate::analysis::{
    deployment_integrals, monte_carlo_mse, mse_bound_from_parts, rate_fit, BoundReport, MsePoint, RateFitResult,
};
use crate::estimator::EstimatorConfig;
use crate::field_model::true_coefficients;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum ExperimentStatus {
    Passed,
    Failed,
    FailedPrecondition,
}

impl ExperimentStatus {
    pub fn label(self) -> &'static str {
        match self {
            Self::Passed => "PASSED",
            Self::Failed => "FAILED",
            Self::FailedPrecondition => "FAILED-PRECONDITION",
        }
    }
}

/// One named check with its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// One CSV row: Monte-Carlo error next to the bound at the same `(n, m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    #[serde(flatten)]
    pub mse: MsePoint,
    pub bound_total: f64,
    pub bound_var_term: f64,
    pub bound_bias_term: f64,
}

impl ExperimentRow {
    /// Mean error does not exceed the bound by more than three CI half-widths.
    pub fn bound_dominates(&self) -> bool {
        self.mse.mean <= self.bound_total + 3.0 * self.mse.ci_half_width()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment_id: String,
    pub config_hash: String,
    pub seed: u64,
    pub status: ExperimentStatus,
    pub rows: Vec<ExperimentRow>,
    pub rate_fit: Option<RateFitResult>,
    pub checks: Vec<Check>,
    /// Set when the run was refused before simulation.
    pub precondition: Option<String>,
}

impl ExperimentResult {
    pub fn passed(&self) -> bool {
        self.status == ExperimentStatus::Passed
    }

    pub fn csv(&self) -> String {
        let mut out = String::from(
            "experiment_id,n,m,trials,mse_mean,mse_std,ci_lo,ci_hi,bound_total,bound_var_term,bound_bias_term,seed,config_hash\n",
        );
        for r in &self.rows {
            let p = &r.mse;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.experiment_id,
                p.n,
                p.m,
                p.trials,
                p.mean,
                p.std,
                p.ci_lo,
                p.ci_hi,
                r.bound_total,
                r.bound_var_term,
                r.bound_bias_term,
                self.seed,
                self.config_hash
            )
            .expect("write to string");
        }
        out
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serialises");
        s.push('\n');
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment {}  [{}]", self.experiment_id, self.status.label());
        let _ = writeln!(s, "seed {}  config {}", self.seed, self.config_hash);
        if let Some(reason) = &self.precondition {
            let _ = writeln!(s, "{reason}");
        }
        if !self.rows.is_empty() {
            let _ = writeln!(s, "{:>9} {:>6} {:>7} {:>12} {:>12} {:>12}", "n", "m", "trials", "mse", "ci_half", "bound");
            for r in &self.rows {
                let _ = writeln!(
                    s,
                    "{:>9} {:>6} {:>7} {:>12.5e} {:>12.3e} {:>12.5e}",
                    r.mse.n,
                    r.mse.m,
                    r.mse.trials,
                    r.mse.mean,
                    r.mse.ci_half_width(),
                    r.bound_total
                );
            }
        }
        if let Some(fit) = &self.rate_fit {
            let _ = writeln!(s, "fitted slope {:.4}  intercept {:.4}  r² {:.4}", fit.slope, fit.intercept, fit.r_squared);
        }
        for c in &self.checks {
            let _ = writeln!(s, "[{}] {}: {}", if c.pass { "pass" } else { "FAIL" }, c.name, c.detail);
        }
        s
    }

    /// Writes `<id>.csv`, `<id>.json` and `<id>_summary.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let mut written = Vec::new();
        for (name, body) in [
            (format!("{}.csv", self.experiment_id), self.csv()),
            (format!("{}.json", self.experiment_id), self.json()),
            (format!("{}_summary.txt", self.experiment_id), self.summary()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| HarnessError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Explanation attached to experiments refused because of a vanishing density.
pub fn divergence_explanation(indices: &[usize], nu: f64) -> String {
    let shown: Vec<String> = indices.iter().take(8).map(|j| j.to_string()).collect();
    let more = if indices.len() > 8 { ", ..." } else { "" };
    format!(
        "the deployment density has infimum {nu} and ∫|φ_j|²/p_X is infinite for j = {}{more}; \
         the variance term of the MSE bound is then unbounded, so the bound gives no guarantee for this \
         deployment. Sensors are too sparse where p_X vanishes; use a density bounded away from zero.",
        shown.join(", ")
    )
}

/// Simulates, bounds and fits one experiment. `workers` only affects speed.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<ExperimentResult, HarnessError> {
    let c = cfg.dynamic_range();
    let est = EstimatorConfig {
        basis: cfg.basis,
        deploy: cfg.deployment.clone(),
        c,
        schedule: cfg.schedule,
    };
    let ms: Vec<usize> = cfg.n_grid.iter().map(|&n| est.terms_for(n)).collect();
    let m_max = ms.iter().copied().max().unwrap_or(1);
    let integrals = deployment_integrals(cfg.basis, &cfg.deployment, m_max);
    let divergent: Vec<usize> = (0..m_max).filter(|&j| !integrals[j].is_finite()).collect();
    let mut result = ExperimentResult {
        experiment_id: cfg.experiment_id.clone(),
        config_hash: cfg.config_hash(),
        seed: cfg.seed,
        status: ExperimentStatus::Passed,
        rows: Vec::new(),
        rate_fit: None,
        checks: Vec::new(),
        precondition: None,
    };
    if !divergent.is_empty() {
        result.status = ExperimentStatus::FailedPrecondition;
        result.precondition = Some(divergence_explanation(&divergent, cfg.deployment.infimum()));
        result.checks.push(Check {
            name: "finite deployment integrals".into(),
            pass: false,
            detail: format!(
                "divergent for {} of {} indices, first j = {}",
                divergent.len(),
                m_max,
                divergent[0]
            ),
        });
        return Ok(result);
    }

    let points = monte_carlo_mse(
        &cfg.field,
        &cfg.deployment,
        cfg.noise,
        &est,
        &cfg.n_grid,
        cfg.trials,
        cfg.seed,
        workers,
    )?;
    let truth = true_coefficients(&cfg.field, cfg.basis, m_max)?;
    let nu = cfg.deployment.infimum();
    for p in points {
        let b: BoundReport = mse_bound_from_parts(&truth, &cfg.field, &integrals, nu, p.n, p.m, c);
        result.rows.push(ExperimentRow {
            mse: p,
            bound_total: b.total,
            bound_var_term: b.variance_term,
            bound_bias_term: b.bias_term,
        });
    }

    let violations: Vec<usize> = result.rows.iter().filter(|r| !r.bound_dominates()).map(|r| r.mse.n).collect();
    result.checks.push(Check {
        name: "bound dominance".into(),
        pass: violations.is_empty(),
        detail: if violations.is_empty() {
            format!("mean ≤ bound + 3·CI half-width at all {} grid points", result.rows.len())
        } else {
            format!("violated at n = {violations:?}")
        },
    });

    if cfg.n_grid.len() >= 4 {
        let mse: Vec<f64> = result.rows.iter().map(|r| r.mse.mean).collect();
        match rate_fit(&cfg.n_grid, &mse) {
            Ok(fit) => {
                if let Some(t) = cfg.tolerance {
                    result.checks.push(Check {
                        name: "slope".into(),
                        pass: fit.slope >= t.slope_min && fit.slope <= t.slope_max,
                        detail: format!("{:.4} in [{}, {}]", fit.slope, t.slope_min, t.slope_max),
                    });
                    result.checks.push(Check {
                        name: "r_squared".into(),
                        pass: fit.r_squared >= t.r_squared_min,
                        detail: format!("{:.4} ≥ {}", fit.r_squared, t.r_squared_min),
                    });
                }
                result.rate_fit = Some(fit);
            }
            Err(e) => result.checks.push(Check {
                name: "rate fit".into(),
                pass: false,
                detail: e.to_string(),
            }),
        }
    } else if cfg.tolerance.is_some() {
        result.checks.push(Check {
            name: "rate fit".into(),
            pass: false,
            detail: "fewer than 4 grid points".into(),
        });
    }
    if result.checks.iter().any(|c| !c.pass) {
        result.status = ExperimentStatus::Failed;
    }
    Ok(result)
}
