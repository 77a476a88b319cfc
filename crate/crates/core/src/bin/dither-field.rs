use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use dither_field::harness::{
    check_conditions, run_experiment, run_suite, run_trace, ExperimentConfig, SuiteName, SuiteOptions, TraceConfig,
};

#[derive(Parser)]
#[command(version, about = "Field reconstruction from dithered one-bit sensors")]
struct Cli {
    /// Output directory (overrides the config's `outputs`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for Monte-Carlo trials (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Master seed (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config
    Run { config: PathBuf },
    /// Run a named suite: rates, lemma1, as_traces, conditions or all
    Suite { name: String },
    /// Report the consistency conditions of an experiment config
    CheckConditions { config: PathBuf },
    /// Follow one sample path and record sup-norm errors
    TraceAs { config: PathBuf },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let result = run_experiment(&cfg, cli.workers)?;
            let dir = cli.out.unwrap_or_else(|| cfg.outputs.clone());
            for path in result.write(&dir)? {
                eprintln!("wrote {}", path.display());
            }
            print!("{}", result.summary());
            Ok(result.passed())
        }
        Command::Suite { name } => {
            let suite: SuiteName = name.parse()?;
            let opts = SuiteOptions {
                out: cli.out,
                workers: cli.workers,
                seed: cli.seed,
                ..SuiteOptions::default()
            };
            let report = run_suite(suite, &opts)?;
            print!("{}", report.table());
            Ok(report.passed())
        }
        Command::CheckConditions { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = check_conditions(&cfg);
            print!("{}", report.table());
            Ok(report.passed())
        }
        Command::TraceAs { config } => {
            let (cfg, mut setup) = TraceConfig::load(&config)?;
            if let Some(seed) = cli.seed {
                setup.seed = seed;
            }
            let outcome = run_trace(&cfg, &setup)?;
            let dir = cli.out.unwrap_or_else(|| cfg.outputs.clone());
            let path = outcome.write(&dir)?;
            eprintln!("wrote {}", path.display());
            for cp in &outcome.trace.checkpoints {
                println!(
                    "n={:>9} m={:>5} sup|S_n|={:.4e} sup|f̂-f|={:.4e} off-jumps={:.4e}",
                    cp.n, cp.m, cp.sup_s, cp.sup_error, cp.sup_error_off_jumps
                );
            }
            for c in &outcome.checks {
                println!("[{}] {}: {}", if c.pass { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            println!("{}", outcome.trace.note);
            Ok(outcome.passed())
        }
    }
}
