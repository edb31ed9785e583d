//! Command-line front end: thin argument handling around `pilotwave::run`.
//!
//! Exit codes: 0 all checks passed, 1 a diagnostic failed its tolerance,
//! 2 the configuration was rejected, 3 a module error interrupted the run.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pilotwave::config::{parse_config_with_seed, ScenarioConfig};
use pilotwave::run::{
    default_out_dir, diagnose, run_scenario, Pipeline, EXIT_CONFIG, EXIT_RUNTIME,
};

#[derive(Parser)]
#[command(name = "pilotwave", version, about = "Quantum-hydrodynamics laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (default: ./runs/<name>-<config hash>)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override every seeded stream in the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cap the worker thread pool
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print nothing; the exit code reports the outcome
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: evolve, snapshot, trajectories, diagnostics, classical suite
    Run { config: PathBuf },
    /// Eigenpairs of the configured potential (1D dirichlet grids)
    Spectrum { config: PathBuf },
    /// Evolve and write the trajectory ensemble only
    Trajectories { config: PathBuf },
    /// Classical suite only: flow, variational system, Lyapunov estimate
    Classical { config: PathBuf },
    /// Recompute diagnostics from a stored run directory and compare
    Diagnose { run_dir: PathBuf },
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG as u8)
    })?;
    parse_config_with_seed(&text, seed).map_err(|e| {
        eprintln!("{e}");
        ExitCode::from(EXIT_CONFIG as u8)
    })
}

fn config_error(message: &str) -> ExitCode {
    eprintln!("{message}");
    ExitCode::from(EXIT_CONFIG as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("cannot configure {threads} threads: {e}");
            return ExitCode::from(EXIT_RUNTIME as u8);
        }
    }

    let (config_path, pipeline) = match &cli.command {
        Command::Run { config } => (config, Pipeline::Full),
        Command::Spectrum { config } => (config, Pipeline::Spectrum),
        Command::Trajectories { config } => (config, Pipeline::TrajectoriesOnly),
        Command::Classical { config } => (config, Pipeline::ClassicalOnly),
        Command::Diagnose { run_dir } => {
            return match diagnose(run_dir) {
                Ok(outcome) => {
                    if !cli.quiet {
                        print!("{}", outcome.report.summary());
                        if outcome.matches {
                            println!("recomputed diagnostics match the stored report");
                        } else {
                            println!("MISMATCH: recomputed diagnostics differ from the stored report");
                        }
                    }
                    ExitCode::from(outcome.exit_code as u8)
                }
                Err(e) => {
                    eprintln!("diagnose failed: {e}");
                    ExitCode::from(EXIT_RUNTIME as u8)
                }
            };
        }
    };

    let cfg = match load_config(config_path, cli.seed) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    match pipeline {
        Pipeline::TrajectoriesOnly if cfg.trajectories.is_none() => {
            return config_error("the trajectories command needs a `[trajectories]` block");
        }
        Pipeline::ClassicalOnly if cfg.classical.is_none() => {
            return config_error("the classical command needs a `[classical]` block");
        }
        _ => {}
    }

    let out_dir = cli.out.clone().unwrap_or_else(|| default_out_dir(&cfg));
    match run_scenario(&cfg, &out_dir, pipeline) {
        Ok(outcome) => {
            for error in &outcome.manifest.errors {
                eprintln!("error: {error}");
            }
            if !cli.quiet {
                print!("{}", outcome.summary);
                println!(
                    "{}: {} ({})",
                    outcome.out_dir.display(),
                    if outcome.manifest.pass { "pass" } else { "FAIL" },
                    outcome.manifest.config_hash
                );
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_RUNTIME as u8)
        }
    }
}
