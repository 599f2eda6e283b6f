use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use serde::Serialize;

use tqmatch::experiment::{run_adversary_suite, run_oracle_check, run_suite, write_csv, ExperimentConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Suite,
    Adversary,
    OracleCheck,
}

/// Matching experiments with threshold-query elicitation.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "suite")]
    mode: Mode,
    /// CSV output path; overrides the config, stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn emit<T: Serialize>(path: Option<&PathBuf>, rows: &[T]) -> Result<()> {
    match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_csv(f, rows)?;
        }
        None => write_csv(io::stdout().lock(), rows)?,
    }
    Ok(())
}

fn run(args: Args) -> Result<bool> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let out = args.out.clone().or_else(|| cfg.out.clone());
    let mut ok = true;
    match args.mode {
        Mode::Suite => {
            let rows = run_suite(&cfg)?;
            emit(out.as_ref(), &rows)?;
        }
        Mode::Adversary => {
            let rows = run_adversary_suite(&cfg)?;
            for r in &rows {
                if !r.replay_identical || !r.benchmark_ok {
                    ok = false;
                    eprintln!(
                        "n = {} {} {}: replay identical {}, benchmark {} vs bound {}",
                        r.n, r.algorithm, r.kind, r.replay_identical, r.sw_benchmark, r.benchmark_bound
                    );
                }
            }
            emit(out.as_ref(), &rows)?;
        }
        Mode::OracleCheck => {
            let rows = run_oracle_check(&cfg)?;
            for r in rows.iter().filter(|r| !r.passed()) {
                ok = false;
                eprintln!("oracle mismatch: n = {} trial {} {} {}", r.n, r.trial, r.kind, r.valuation_kind);
            }
            emit(out.as_ref(), &rows)?;
        }
    }
    io::stdout().flush()?;
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
