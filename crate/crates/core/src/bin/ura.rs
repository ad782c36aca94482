//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ura_core::harness::{
    emit_results, predict, run_search, simulate_point, write_csv, write_ndtext, OutputFormat, ResultRow,
    SystemConfig,
};
use ura_core::validation::run_all;
use ura_core::{Error, Result};

#[derive(Parser)]
#[command(name = "ura", about = "Unsourced random access link-level simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: OutputFormat,
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep over the configured Eb/N0 grid.
    Simulate,
    /// Smallest Eb/N0 on a 0.25 dB grid meeting the target PUPE.
    Search,
    /// Closed-form PUPE over the configured Eb/N0 grid.
    Predict,
    /// Runs the acceptance checks.
    Validate,
}

fn load_config(common: &Common) -> Result<SystemConfig> {
    let mut cfg = match &common.config {
        Some(path) => SystemConfig::parse(&std::fs::read_to_string(path)?)?,
        None => SystemConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(rows: &[ResultRow], cfg: &SystemConfig, common: &Common) -> Result<()> {
    match &common.out {
        Some(path) => emit_results(rows, cfg, path, common.format),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            match common.format {
                OutputFormat::Csv => write_csv(&mut lock, rows)?,
                OutputFormat::Ndtext => write_ndtext(&mut lock, cfg, rows)?,
            }
            lock.flush()?;
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let common = &cli.common;
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Simulate => {
            let cfg = load_config(common)?;
            if cfg.ebn0_db.is_empty() {
                return Err(Error::Config("empty Eb/N0 grid".into()));
            }
            let mut rows = Vec::with_capacity(cfg.ebn0_db.len());
            for &e in &cfg.ebn0_db {
                let row = simulate_point(&cfg, e)?;
                if common.verbose {
                    eprintln!("{} dB: P_e {:.4} [{:.4}, {:.4}]", e, row.pe, row.ci_lo, row.ci_hi);
                }
                rows.push(row);
            }
            emit(&rows, &cfg, common)?;
        }
        Command::Search => {
            let cfg = load_config(common)?;
            let outcome = run_search(&cfg)?;
            if common.verbose {
                for r in &outcome.evaluated {
                    eprintln!("{} dB: P_e {:.4} (upper {:.4})", r.ebn0_db, r.pe, r.ci_hi);
                }
            }
            let (lo, hi) = outcome.bracket;
            match &outcome.attained {
                Some(r) => eprintln!("target {} met at {} dB (bracket {lo} .. {hi})", cfg.target_pe, r.ebn0_db),
                None => {
                    emit(&outcome.evaluated, &cfg, common)?;
                    return Err(Error::Infeasible(format!(
                        "target P_e {} not met up to {} dB",
                        cfg.target_pe, cfg.search_hi_db
                    )));
                }
            }
            emit(&outcome.evaluated, &cfg, common)?;
        }
        Command::Predict => {
            let cfg = load_config(common)?;
            let rows = predict(&cfg)?;
            emit(&rows, &cfg, common)?;
        }
        Command::Validate => {
            let seed = common.seed.unwrap_or(1);
            let reports = run_all(seed);
            for r in &reports {
                println!("{r}");
            }
            return Ok(reports.iter().all(|r| r.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
