use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ConfigError, FieldSource, Violation};
use super::experiment::Check;
use super::HarnessError;
use crate::analysis::{as_error_trace, AsTraceResult, TraceSetup};
use crate::estimator::Schedule;
use crate::field_model::{Basis, FieldSpec};
use crate::sensing::{DeploymentDensity, NoiseModel};

fn default_eval_points() -> usize {
    1001
}

fn default_jump_margin() -> f64 {
    0.02
}

fn default_gamma() -> f64 {
    1.5
}

/// Document accepted by `trace-as`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    pub experiment_id: String,
    pub field: FieldSource,
    #[serde(default)]
    pub basis: Basis,
    pub deployment: DeploymentDensity,
    pub noise: NoiseModel,
    pub psi: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub seed: u64,
    pub checkpoints: Vec<usize>,
    #[serde(default = "default_eval_points")]
    pub eval_points: usize,
    #[serde(default = "default_jump_margin")]
    pub jump_margin: f64,
    /// Pass if `sup|S_n|` at the last checkpoint is below this fraction of the first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sup_ratio: Option<f64>,
    /// Pass only if the off-jump sup error decreases from first to last checkpoint.
    #[serde(default)]
    pub require_off_jump_decrease: bool,
    pub outputs: PathBuf,
}

impl TraceConfig {
    pub fn from_json(text: &str, source: &str, base_dir: Option<&Path>) -> Result<(Self, TraceSetup), ConfigError> {
        let err = |field: &str, message: String| ConfigError {
            source: source.to_string(),
            violations: vec![Violation {
                field: field.to_string(),
                message,
            }],
        };
        let cfg: TraceConfig = serde_json::from_str(text).map_err(|e| err("<document>", e.to_string()))?;
        let mut violations = Vec::new();
        let mut bad = |field: &str, message: &str| {
            violations.push(Violation {
                field: field.into(),
                message: message.into(),
            })
        };
        if !(cfg.psi > 0.0 && cfg.psi < 1.0) {
            bad("psi", "must lie in (0, 1)");
        }
        if cfg.checkpoints.is_empty() || cfg.checkpoints[0] == 0 || cfg.checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            bad("checkpoints", "must be positive and strictly increasing");
        }
        if cfg.eval_points < 2 {
            bad("eval_points", "must be at least 2");
        }
        if !(cfg.jump_margin >= 0.0) {
            bad("jump_margin", "must be non-negative");
        }
        if let Err(e) = cfg.deployment.validate() {
            bad("deployment", &e.to_string());
        }
        if let Err(e) = cfg.noise.validate() {
            bad("noise", &e.to_string());
        }
        let field = match &cfg.field {
            FieldSource::Inline(doc) => FieldSpec::try_from(doc.clone()).map_err(|e| e.to_string()),
            FieldSource::Path(p) => {
                let path = match base_dir {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p.clone(),
                };
                std::fs::read_to_string(&path)
                    .map_err(|e| e.to_string())
                    .and_then(|t| serde_json::from_str::<FieldSpec>(&t).map_err(|e| e.to_string()))
            }
        };
        let field = match field {
            Ok(f) => Some(f),
            Err(e) => {
                bad("field", &e);
                None
            }
        };
        if !violations.is_empty() {
            return Err(ConfigError {
                source: source.to_string(),
                violations,
            });
        }
        let setup = TraceSetup {
            field: field.expect("checked above"),
            basis: cfg.basis,
            deploy: cfg.deployment.clone(),
            noise: cfg.noise,
            schedule: Schedule::Power { psi: cfg.psi },
            gamma: cfg.gamma,
            seed: cfg.seed,
            checkpoints: cfg.checkpoints.clone(),
            eval_points: cfg.eval_points,
            jump_margin: cfg.jump_margin,
        };
        Ok((cfg, setup))
    }

    pub fn load(path: &Path) -> Result<(Self, TraceSetup), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source: path.display().to_string(),
            violations: vec![Violation {
                field: "<document>".into(),
                message: e.to_string(),
            }],
        })?;
        Self::from_json(&text, &path.display().to_string(), path.parent())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceOutcome {
    pub experiment_id: String,
    pub trace: AsTraceResult,
    pub checks: Vec<Check>,
}

impl TraceOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("trace serialises");
        s.push('\n');
        s
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let path = dir.join(format!("{}.json", self.experiment_id));
        std::fs::write(&path, self.json()).map_err(|e| HarnessError::io(&path, e))?;
        Ok(path)
    }
}

pub fn run_trace(cfg: &TraceConfig, setup: &TraceSetup) -> Result<TraceOutcome, HarnessError> {
    let trace = as_error_trace(setup)?;
    let mut checks = Vec::new();
    let first = trace.checkpoints.first().expect("non-empty checkpoints");
    let last = trace.checkpoints.last().expect("non-empty checkpoints");
    if let Some(limit) = cfg.max_sup_ratio {
        let ratio = last.sup_s / first.sup_s;
        checks.push(Check {
            name: "sup|S_n| decay".into(),
            pass: ratio < limit,
            detail: format!(
                "{:.4e} at n={} vs {:.4e} at n={} (ratio {ratio:.4} < {limit})",
                last.sup_s, last.n, first.sup_s, first.n
            ),
        });
    }
    if cfg.require_off_jump_decrease {
        checks.push(Check {
            name: "off-jump sup error decrease".into(),
            pass: last.sup_error_off_jumps < first.sup_error_off_jumps,
            detail: format!(
                "{:.4e} at n={} vs {:.4e} at n={}",
                last.sup_error_off_jumps, last.n, first.sup_error_off_jumps, first.n
            ),
        });
    }
    checks.push(Check {
        name: "schedule conditions".into(),
        pass: trace.condition_report.valid,
        detail: format!(
            "psi={} gamma={} gamma*psi={}",
            trace.condition_report.psi, trace.condition_report.gamma, trace.condition_report.psi_prime
        ),
    });
    Ok(TraceOutcome {
        experiment_id: cfg.experiment_id.clone(),
        trace,
        checks,
    })
}
