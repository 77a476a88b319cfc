use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{LargeN, TrialPolicy};
use crate::estimator::Schedule;
use crate::field_model::{Basis, FieldDocument, FieldSpec};
use crate::sensing::{DeploymentDensity, NoiseModel};

/// Declared pass band for the fitted log-log slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeTolerance {
    pub slope_min: f64,
    pub slope_max: f64,
    #[serde(default)]
    pub r_squared_min: f64,
}

/// A field given inline or as a path to a field document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSource {
    Inline(FieldDocument),
    Path(PathBuf),
}

/// One experiment: a field, a sensing setup, a schedule and an `n` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub field: FieldSpec,
    pub basis: Basis,
    pub deployment: DeploymentDensity,
    pub noise: NoiseModel,
    pub schedule: Schedule,
    pub n_grid: Vec<usize>,
    pub trials: TrialPolicy,
    pub seed: u64,
    pub outputs: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<SlopeTolerance>,
}

/// Every problem found in a configuration document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration {}:", self.source)?;
        for v in &self.violations {
            writeln!(f, "  {}: {}", v.field, v.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

struct Collector {
    violations: Vec<Violation>,
}

impl Collector {
    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn take<T: for<'de> Deserialize<'de>>(&mut self, obj: &serde_json::Map<String, Value>, key: &str) -> Option<T> {
        match obj.get(key) {
            None => {
                self.push(key, "missing");
                None
            }
            Some(v) => self.parse(key, v.clone()),
        }
    }

    fn take_opt<T: for<'de> Deserialize<'de>>(&mut self, obj: &serde_json::Map<String, Value>, key: &str) -> Option<T> {
        obj.get(key).filter(|v| !v.is_null()).and_then(|v| self.parse(key, v.clone()))
    }

    fn parse<T: for<'de> Deserialize<'de>>(&mut self, key: &str, v: Value) -> Option<T> {
        match serde_json::from_value(v) {
            Ok(t) => Some(t),
            Err(e) => {
                self.push(key, e.to_string());
                None
            }
        }
    }
}

const KNOWN_KEYS: [&str; 12] = [
    "experiment_id",
    "field",
    "basis",
    "deployment",
    "noise",
    "schedule",
    "n_grid",
    "trials",
    "large_n",
    "seed",
    "outputs",
    "tolerance",
];

impl ExperimentConfig {
    /// Parses and validates a JSON document. Relative field paths resolve
    /// against `base_dir`.
    pub fn from_json(text: &str, source: &str, base_dir: Option<&Path>) -> Result<Self, ConfigError> {
        let fail = |violations| ConfigError {
            source: source.to_string(),
            violations,
        };
        let value: Value = serde_json::from_str(text).map_err(|e| {
            fail(vec![Violation {
                field: "<document>".into(),
                message: e.to_string(),
            }])
        })?;
        let Value::Object(obj) = value else {
            return Err(fail(vec![Violation {
                field: "<document>".into(),
                message: "expected a JSON object".into(),
            }]));
        };
        let mut c = Collector { violations: Vec::new() };
        for key in obj.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                c.push(key, "unknown field");
            }
        }
        let experiment_id: Option<String> = c.take(&obj, "experiment_id");
        if let Some(id) = &experiment_id {
            if id.is_empty() || !id.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-') {
                c.push("experiment_id", "must be non-empty and use only [A-Za-z0-9_-]");
            }
        }
        let field = c.take::<FieldSource>(&obj, "field").and_then(|src| {
            let doc = match src {
                FieldSource::Inline(doc) => Some(doc),
                FieldSource::Path(p) => {
                    let path = match base_dir {
                        Some(dir) if p.is_relative() => dir.join(&p),
                        _ => p.clone(),
                    };
                    match std::fs::read_to_string(&path) {
                        Ok(t) => c.parse::<FieldDocument>("field", serde_json::from_str(&t).unwrap_or(Value::Null)),
                        Err(e) => {
                            c.push("field", format!("cannot read {}: {e}", path.display()));
                            None
                        }
                    }
                }
            }?;
            match FieldSpec::try_from(doc) {
                Ok(f) => Some(f),
                Err(e) => {
                    c.push("field", e.to_string());
                    None
                }
            }
        });
        let basis: Basis = c.take_opt(&obj, "basis").unwrap_or_default();
        if let Basis::Step { cells: 0 } = basis {
            c.push("basis", "step basis needs at least one cell");
        }
        let deployment: Option<DeploymentDensity> = c.take(&obj, "deployment");
        if let Some(Err(e)) = deployment.as_ref().map(DeploymentDensity::validate) {
            c.push("deployment", e.to_string());
        }
        let noise: Option<NoiseModel> = c.take(&obj, "noise");
        if let Some(Err(e)) = noise.as_ref().map(NoiseModel::validate) {
            c.push("noise", e.to_string());
        }
        let schedule: Option<Schedule> = c.take(&obj, "schedule");
        if let Some(s) = &schedule {
            if let Err(msg) = validate_schedule(s) {
                c.push("schedule", msg);
            }
        }
        let n_grid: Option<Vec<usize>> = c.take(&obj, "n_grid");
        if let Some(grid) = &n_grid {
            if grid.is_empty() {
                c.push("n_grid", "must not be empty");
            } else if grid[0] == 0 {
                c.push("n_grid", "entries must be positive");
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                c.push("n_grid", "must be strictly increasing");
            }
        }
        let base: Option<usize> = c.take(&obj, "trials");
        if matches!(base, Some(t) if t < 2) {
            c.push("trials", "must be at least 2");
        }
        let large_n: Option<LargeN> = c.take_opt(&obj, "large_n");
        if matches!(large_n, Some(l) if l.trials < 2) {
            c.push("large_n", "trials must be at least 2");
        }
        let seed: Option<u64> = c.take(&obj, "seed");
        let outputs: Option<PathBuf> = c.take(&obj, "outputs");
        let tolerance: Option<SlopeTolerance> = c.take_opt(&obj, "tolerance");
        if let Some(t) = &tolerance {
            if !(t.slope_min <= t.slope_max) {
                c.push("tolerance", "slope_min must not exceed slope_max");
            }
            if !(0.0..=1.0).contains(&t.r_squared_min) {
                c.push("tolerance", "r_squared_min must lie in [0, 1]");
            }
            if matches!(&n_grid, Some(g) if g.len() < 4) {
                c.push("n_grid", "a slope tolerance needs at least 4 grid points");
            }
        }
        if let (Some(grid), Some(s)) = (&n_grid, &schedule) {
            if let Some(dim) = basis.dimension() {
                if let Some(&n) = grid.iter().find(|&&n| s.resolve(n) > dim) {
                    c.push("schedule", format!("m({n}) = {} exceeds the basis dimension {dim}", s.resolve(n)));
                }
            }
        }
        if !c.violations.is_empty() {
            return Err(fail(c.violations));
        }
        // all present once no violation was recorded
        Ok(Self {
            experiment_id: experiment_id.unwrap(),
            field: field.unwrap(),
            basis,
            deployment: deployment.unwrap(),
            noise: noise.unwrap(),
            schedule: schedule.unwrap(),
            n_grid: n_grid.unwrap(),
            trials: TrialPolicy { base: base.unwrap(), large_n },
            seed: seed.unwrap(),
            outputs: outputs.unwrap(),
            tolerance,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source: path.display().to_string(),
            violations: vec![Violation {
                field: "<document>".into(),
                message: e.to_string(),
            }],
        })?;
        Self::from_json(&text, &path.display().to_string(), path.parent())
    }

    /// Canonical JSON of the resolved configuration (field inlined).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    /// First 12 hex digits of SHA-256 over `"blob <len>\0<canonical json>"`.
    pub fn config_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let body = self.canonical_json();
        let mut h = Sha256::new();
        h.update(format!("blob {}\0", body.len()).as_bytes());
        h.update(body.as_bytes());
        h.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    /// Dynamic range `c = a + b` shared by sensors and fusion center.
    pub fn dynamic_range(&self) -> f64 {
        self.field.amplitude() + self.noise.bound()
    }
}

fn validate_schedule(s: &Schedule) -> Result<(), String> {
    match *s {
        Schedule::Fixed { m: 0 } => Err("fixed m must be at least 1".into()),
        Schedule::FiniteDim { k: 0 } => Err("k must be at least 1".into()),
        Schedule::Sobolev { s } if !(s > 0.0 && s.is_finite()) => Err("s must be positive".into()),
        Schedule::Power { psi } if !(psi > 0.0 && psi <= 1.0) => Err("psi must lie in (0, 1]".into()),
        _ => Ok(()),
    }
}
