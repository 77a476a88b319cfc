//! Experiment configuration, runners, suites and artifact writing.

mod config;
mod experiment;
mod lemma1;
mod suite;
mod trace;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{ConfigError, ExperimentConfig, FieldSource, SlopeTolerance, Violation};
pub use experiment::{
    divergence_explanation, run_experiment, Check, ExperimentResult, ExperimentRow, ExperimentStatus,
};
pub use lemma1::{lemma1_csv, lemma1_deployments, lemma1_fields, lemma1_noises, lemma1_study, Lemma1Cell, Lemma1Plan};
pub use suite::{check_conditions, run_suite, SuiteName, SuiteOptions, SuiteReport, SuiteRow, SUITE_NAMES};
pub use trace::{run_trace, TraceConfig, TraceOutcome};

use crate::analysis::AnalysisError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown suite {0:?}; expected one of rates, lemma1, as_traces, conditions, all")]
    UnknownSuite(String),
    #[error("unknown shipped config {0:?}")]
    UnknownConfig(String),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<crate::field_model::CoefficientError> for HarnessError {
    fn from(e: crate::field_model::CoefficientError) -> Self {
        Self::Analysis(e.into())
    }
}

/// Configuration documents bundled with the crate, by file stem.
pub const SHIPPED_CONFIGS: [(&str, &str); 8] = [
    ("finite_dim_k5", include_str!("../../configs/finite_dim_k5.json")),
    ("bv_sawtooth", include_str!("../../configs/bv_sawtooth.json")),
    ("sobolev_s1", include_str!("../../configs/sobolev_s1.json")),
    ("mismatch_linear2x", include_str!("../../configs/mismatch_linear2x.json")),
    ("affine_floor_bv", include_str!("../../configs/affine_floor_bv.json")),
    ("trace_zero", include_str!("../../configs/trace_zero.json")),
    ("trace_sawtooth", include_str!("../../configs/trace_sawtooth.json")),
    ("trace_sawtooth_psi03", include_str!("../../configs/trace_sawtooth_psi03.json")),
];

pub fn shipped_text(name: &str) -> Result<&'static str, HarnessError> {
    SHIPPED_CONFIGS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| HarnessError::UnknownConfig(name.to_string()))
}

pub fn shipped_experiment(name: &str) -> Result<ExperimentConfig, HarnessError> {
    Ok(ExperimentConfig::from_json(shipped_text(name)?, name, None)?)
}

pub fn shipped_trace(name: &str) -> Result<(TraceConfig, crate::analysis::TraceSetup), HarnessError> {
    Ok(TraceConfig::from_json(shipped_text(name)?, name, None)?)
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_configs_parse() {
        for (name, _) in SHIPPED_CONFIGS {
            if name.starts_with("trace_") {
                shipped_trace(name).unwrap();
            } else {
                let cfg = shipped_experiment(name).unwrap();
                assert_eq!(cfg.experiment_id, name);
            }
        }
        assert!(matches!(shipped_text("nope"), Err(HarnessError::UnknownConfig(_))));
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }
}
