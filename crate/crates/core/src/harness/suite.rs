use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::experiment::{run_experiment, ExperimentStatus};
use super::lemma1::{lemma1_csv, lemma1_study, Lemma1Plan};
use super::trace::run_trace;
use super::{csv_field, shipped_experiment, shipped_trace, HarnessError};
use crate::analysis::{
    basis_deployment_integral, check_consistency_conditions, deployment_integrals, validate_as_schedule,
};
use crate::estimator::Schedule;
use crate::field_model::{make_sobolev_field, Basis, BvShape, FieldSpec};
use crate::sensing::DeploymentDensity;

pub const SUITE_NAMES: [&str; 5] = ["rates", "lemma1", "as_traces", "conditions", "all"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteName {
    Rates,
    Lemma1,
    AsTraces,
    Conditions,
    All,
}

impl FromStr for SuiteName {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s {
            "rates" => Ok(Self::Rates),
            "lemma1" => Ok(Self::Lemma1),
            "as_traces" => Ok(Self::AsTraces),
            "conditions" => Ok(Self::Conditions),
            "all" => Ok(Self::All),
            other => Err(HarnessError::UnknownSuite(other.to_string())),
        }
    }
}

impl SuiteName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rates => "rates",
            Self::Lemma1 => "lemma1",
            Self::AsTraces => "as_traces",
            Self::Conditions => "conditions",
            Self::All => "all",
        }
    }
}

#[derive(Debug, Clone)]
#[derive(Default)]
pub struct SuiteOptions {
    /// Replaces each config's `outputs` directory when set.
    pub out: Option<PathBuf>,
    pub workers: usize,
    /// Replaces every seed when set.
    pub seed: Option<u64>,
    pub lemma1: Lemma1Plan,
}


impl SuiteOptions {
    fn dir_for(&self, configured: &Path) -> PathBuf {
        self.out.clone().unwrap_or_else(|| configured.to_path_buf())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub suite: String,
    pub check: String,
    pub observed: String,
    pub target: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub rows: Vec<SuiteRow>,
    pub artifacts: Vec<PathBuf>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            ..Self::default()
        }
    }

    fn row(&mut self, suite: &str, check: impl Into<String>, observed: impl Into<String>, target: impl Into<String>, pass: bool) {
        self.rows.push(SuiteRow {
            suite: suite.to_string(),
            check: check.into(),
            observed: observed.into(),
            target: target.into(),
            pass,
        });
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn table(&self) -> String {
        let w_check = self.rows.iter().map(|r| r.check.chars().count()).max().unwrap_or(5).max(5);
        let w_obs = self.rows.iter().map(|r| r.observed.chars().count()).max().unwrap_or(8).max(8);
        let mut s = String::new();
        let _ = writeln!(s, "{:<4}  {:<10}  {:<w_check$}  {:<w_obs$}  target", "", "suite", "check", "observed");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<4}  {:<10}  {:<w_check$}  {:<w_obs$}  {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.suite,
                r.check,
                r.observed,
                r.target
            );
        }
        let failed = self.rows.iter().filter(|r| !r.pass).count();
        let _ = writeln!(s, "{} checks, {} failed", self.rows.len(), failed);
        s
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("suite,check,observed,target,pass\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                csv_field(&r.suite),
                csv_field(&r.check),
                csv_field(&r.observed),
                csv_field(&r.target),
                r.pass
            );
        }
        s
    }

    fn extend(&mut self, other: SuiteReport) {
        self.rows.extend(other.rows);
        self.artifacts.extend(other.artifacts);
    }
}

fn write_file(path: &Path, body: &str) -> Result<PathBuf, HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    std::fs::write(path, body).map_err(|e| HarnessError::io(path, e))?;
    Ok(path.to_path_buf())
}

/// Runs a named bundle of checks and writes its artifacts and report.
pub fn run_suite(name: SuiteName, opts: &SuiteOptions) -> Result<SuiteReport, HarnessError> {
    let mut report = match name {
        SuiteName::Rates => rates(opts)?,
        SuiteName::Lemma1 => lemma1(opts)?,
        SuiteName::AsTraces => as_traces(opts)?,
        SuiteName::Conditions => conditions(opts)?,
        SuiteName::All => {
            let mut all = SuiteReport::new("all");
            for part in [SuiteName::Conditions, SuiteName::AsTraces, SuiteName::Rates, SuiteName::Lemma1] {
                all.extend(run_suite(part, opts)?);
            }
            all
        }
    };
    report.name = name.as_str().to_string();
    let dir = opts.dir_for(Path::new("out"));
    report.artifacts.push(write_file(&dir.join(format!("{}_report.txt", name.as_str())), &report.table())?);
    report.artifacts.push(write_file(&dir.join(format!("{}_report.csv", name.as_str())), &report.csv())?);
    Ok(report)
}

fn with_seed(mut cfg: ExperimentConfig, opts: &SuiteOptions) -> ExperimentConfig {
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    cfg
}

fn rates(opts: &SuiteOptions) -> Result<SuiteReport, HarnessError> {
    let mut report = SuiteReport::new("rates");
    for name in ["finite_dim_k5", "bv_sawtooth", "sobolev_s1"] {
        let cfg = with_seed(shipped_experiment(name)?, opts);
        let result = run_experiment(&cfg, opts.workers)?;
        report.artifacts.extend(result.write(&opts.dir_for(&cfg.outputs))?);
        for check in &result.checks {
            let target = match (check.name.as_str(), cfg.tolerance) {
                ("slope", Some(t)) => format!("[{}, {}]", t.slope_min, t.slope_max),
                ("r_squared", Some(t)) => format!("≥ {}", t.r_squared_min),
                ("bound dominance", _) => "mean ≤ total + 3·ci_half at every n".into(),
                _ => String::new(),
            };
            let observed = match (check.name.as_str(), &result.rate_fit) {
                ("slope", Some(f)) => format!("{:.4}", f.slope),
                ("r_squared", Some(f)) => format!("{:.4}", f.r_squared),
                _ => check.detail.clone(),
            };
            report.row("rates", format!("{name}: {}", check.name), observed, target, check.pass);
        }
    }
    Ok(report)
}

fn lemma1(opts: &SuiteOptions) -> Result<SuiteReport, HarnessError> {
    let mut report = SuiteReport::new("lemma1");
    let mut plan = opts.lemma1;
    if let Some(seed) = opts.seed {
        plan.seed = seed;
    }
    let cells = lemma1_study(plan, opts.workers)?;
    let dir = opts.dir_for(Path::new("out/lemma1"));
    report.artifacts.push(write_file(&dir.join("lemma1.csv"), &lemma1_csv(&cells))?);
    for chunk in cells.chunks(plan.coefficients) {
        let max_z = chunk.iter().map(|c| c.z).fold(0.0, f64::max);
        let max_ratio = chunk.iter().map(|c| c.variance / c.variance_bound).fold(0.0, f64::max);
        let head = &chunk[0];
        report.row(
            "lemma1",
            format!("{} / {} / {}", head.field, head.deployment, head.noise),
            format!("max z {max_z:.2}, max var/bound {max_ratio:.3}"),
            "z ≤ 6, var/bound ≤ 1.1",
            max_z <= 6.0 && max_ratio <= 1.1,
        );
    }
    let total = cells.len();
    let within4 = cells.iter().filter(|c| c.z <= 4.0).count();
    report.row(
        "lemma1",
        "cells with mean within 4σ",
        format!("{within4}/{total}"),
        "≥ 95%",
        within4 as f64 >= 0.95 * total as f64,
    );
    let beyond6 = cells.iter().filter(|c| c.z > 6.0).count();
    report.row("lemma1", "cells beyond 6σ", beyond6.to_string(), "0", beyond6 == 0);
    let over = cells.iter().filter(|c| c.variance > 1.1 * c.variance_bound).count();
    report.row("lemma1", "cells with var > 1.1·bound", over.to_string(), "0", over == 0);
    Ok(report)
}

fn as_traces(opts: &SuiteOptions) -> Result<SuiteReport, HarnessError> {
    let mut report = SuiteReport::new("as_traces");
    for name in ["trace_zero", "trace_sawtooth", "trace_sawtooth_psi03"] {
        let (cfg, mut setup) = shipped_trace(name)?;
        if let Some(seed) = opts.seed {
            setup.seed = seed;
        }
        let outcome = run_trace(&cfg, &setup)?;
        report.artifacts.push(outcome.write(&opts.dir_for(&cfg.outputs))?);
        for check in &outcome.checks {
            report.row("as_traces", format!("{name}: {}", check.name), check.detail.clone(), "", check.pass);
        }
    }
    Ok(report)
}

/// Shipped field menu used for the partial-sum bound.
pub(crate) fn field_menu() -> Vec<FieldSpec> {
    let mut fields: Vec<FieldSpec> = super::lemma1::lemma1_fields().into_iter().map(|(_, f)| f).collect();
    fields.push(FieldSpec::bounded_variation(BvShape::Staircase, 0.75).expect("valid field"));
    fields.push(make_sobolev_field(1.0, 7, 1.0).expect("valid field"));
    fields
}

fn conditions(opts: &SuiteOptions) -> Result<SuiteReport, HarnessError> {
    let mut report = SuiteReport::new("conditions");
    let grid = [100, 1_000, 10_000, 100_000, 1_000_000];
    for (schedule, expect) in [
        (Schedule::Bv, true),
        (Schedule::Sobolev { s: 1.0 }, true),
        (Schedule::Power { psi: 1.0 }, false),
        (Schedule::Fixed { m: 5 }, false),
    ] {
        let r = check_consistency_conditions(schedule, Basis::Fourier, &DeploymentDensity::Uniform, &grid);
        report.row(
            "conditions",
            format!("consistency {}", schedule.name()),
            format!(
                "m grows {}, nu>0 {}, variance sum decreasing {}",
                r.m_grows, r.nu_positive, r.variance_sum_decreasing
            ),
            if expect { "pass" } else { "fail" },
            r.pass == expect,
        );
    }

    let fields = field_menu();
    for (psi, gamma, expect) in [(0.5, 1.5, true), (0.5, 2.5, false)] {
        let r = validate_as_schedule(psi, gamma, Basis::Fourier, &DeploymentDensity::Uniform, &fields);
        report.row(
            "conditions",
            format!("a.s. schedule psi={psi} gamma={gamma}"),
            format!("gamma*psi = {}, valid {}", r.psi_prime, r.valid),
            if expect { "accepted" } else { "rejected" },
            r.valid == expect,
        );
    }
    for deploy in [DeploymentDensity::Uniform, DeploymentDensity::AffineFloor { nu: 0.5 }] {
        let r = validate_as_schedule(0.5, 1.5, Basis::Fourier, &deploy, &fields);
        let nu = deploy.infimum();
        let a_max = fields.iter().map(FieldSpec::amplitude).fold(0.0, f64::max);
        let constants_ok = r.c1 == Some(1.0 / nu) && r.c2 == Some(a_max);
        let worst = r.grid.iter().map(|g| g.kernel_sup / g.kernel_bound).fold(0.0, f64::max);
        report.row(
            "conditions",
            format!("uniform-bound grid check, {}", deploy.name()),
            format!("C1 {:?}, C2 {:?}, max kernel/bound {worst:.6}, grid ok {}", r.c1, r.c2, r.grid_ok),
            format!("C1 = {}, C2 = {a_max}, grid ok", 1.0 / nu),
            constants_ok && r.grid_ok,
        );
    }

    let cfg = with_seed(shipped_experiment("mismatch_linear2x")?, opts);
    let result = run_experiment(&cfg, opts.workers)?;
    report.artifacts.extend(result.write(&opts.dir_for(&cfg.outputs))?);
    let m_max = cfg.schedule.resolve(*cfg.n_grid.last().expect("non-empty grid"));
    let j0_divergent = !deployment_integrals(cfg.basis, &cfg.deployment, m_max)[0].is_finite();
    report.row(
        "conditions",
        "mismatch linear2x + fourier",
        format!("{}, j=0 divergent {j0_divergent}", result.status.label()),
        "FAILED-PRECONDITION, j=0 divergent",
        result.status == ExperimentStatus::FailedPrecondition && j0_divergent,
    );
    let v = basis_deployment_integral(Basis::Fourier, &DeploymentDensity::AffineFloor { nu: 0.5 }, 0);
    let ln3 = 3f64.ln();
    report.row(
        "conditions",
        "∫|φ_0|²/p_X for affine_floor(nu=0.5)",
        format!("{:.10}", v.as_f64()),
        format!("ln 3 = {ln3:.10} ± 1e-6"),
        (v.as_f64() - ln3).abs() <= 1e-6,
    );
    Ok(report)
}

/// Consistency conditions and deployment integrals for one experiment config.
pub fn check_conditions(cfg: &ExperimentConfig) -> SuiteReport {
    let mut report = SuiteReport::new("check-conditions");
    let r = check_consistency_conditions(cfg.schedule, cfg.basis, &cfg.deployment, &cfg.n_grid);
    let id = cfg.experiment_id.as_str();
    report.row(id, "m(n) non-decreasing and growing", format!("{:?}", r.m_values), "grows", r.m_grows);
    report.row(id, "deployment infimum positive", format!("{}", r.nu), "> 0", r.nu_positive);
    report.row(
        id,
        "(1/n) Σ ∫|φ_j|²/p_X decreasing",
        format!("{:?}", r.variance_sums),
        "strictly decreasing",
        r.variance_sum_decreasing,
    );
    let m_max = r.m_values.iter().copied().max().unwrap_or(1);
    let divergent: Vec<usize> = deployment_integrals(cfg.basis, &cfg.deployment, m_max)
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_finite())
        .map(|(j, _)| j)
        .collect();
    report.row(
        id,
        "finite ∫|φ_j|²/p_X for j < m(n_max)",
        if divergent.is_empty() { "all finite".to_string() } else { format!("divergent j {divergent:?}") },
        "all finite",
        divergent.is_empty(),
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        for n in SUITE_NAMES {
            assert_eq!(n.parse::<SuiteName>().unwrap().as_str(), n);
        }
        assert!(matches!("bogus".parse::<SuiteName>(), Err(HarnessError::UnknownSuite(_))));
    }

    #[test]
    fn conditions_suite_passes() {
        let dir = tempfile::tempdir().unwrap();
        let opts = SuiteOptions {
            out: Some(dir.path().to_path_buf()),
            workers: 1,
            ..SuiteOptions::default()
        };
        let r = run_suite(SuiteName::Conditions, &opts).unwrap();
        assert!(r.passed(), "{}", r.table());
        assert!(r.rows.iter().any(|row| row.check.contains("power(psi=1)") && row.target == "fail"));
        assert!(dir.path().join("conditions_report.csv").exists());
        assert!(dir.path().join("mismatch_linear2x_summary.txt").exists());
    }

    #[test]
    fn check_conditions_on_configs() {
        assert!(check_conditions(&shipped_experiment("bv_sawtooth").unwrap()).passed());
        let bad = check_conditions(&shipped_experiment("mismatch_linear2x").unwrap());
        assert!(!bad.passed());
        assert!(!check_conditions(&shipped_experiment("finite_dim_k5").unwrap()).passed());
    }
}
