use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use bqpatch_cli::config::{LemmaConfig, RunConfig};
use bqpatch_cli::error::{CliError, Result};

/// Numerical laboratory for mirror-symmetric temperature patches in a
/// viscous incompressible buoyant flow.
#[derive(Parser)]
#[command(name = "bqpatch", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a simulation from a key=value config file.
    Simulate {
        /// Path to the run configuration.
        config: PathBuf,
    },
    /// Evaluate the constructive geometry checks over a shape sweep.
    VerifyLemmas {
        /// Path to the sweep configuration.
        config: PathBuf,
    },
    /// Recompute diagnostics from a run directory's field snapshots and
    /// compare them to the recorded CSV.
    Diagnose {
        /// Run directory written by `simulate`.
        run_dir: PathBuf,
        /// Largest allowed relative deviation.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
}

fn read_config(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Simulate { config } => {
            let cfg = RunConfig::parse(&read_config(&config)?)?;
            let outcome = bqpatch_cli::run::simulate(&cfg)?;
            println!(
                "run complete: {} diagnostic records, {} geometry records -> {}",
                outcome.records.len(),
                outcome.geometry.len(),
                outcome.dir.display()
            );
            if let Some(t) = outcome.geometry_valid_until {
                println!("geometry tracking ended at t = {t}");
            }
            Ok(())
        }
        Cmd::VerifyLemmas { config } => {
            let cfg = LemmaConfig::parse(&read_config(&config)?)?;
            let outcome = bqpatch_cli::lemma_driver::verify_lemmas(&cfg)?;
            println!(
                "{} check rows written to {} ({} failing)",
                outcome.rows,
                outcome.dir.display(),
                outcome.failures
            );
            if outcome.failures > 0 {
                return Err(CliError::Invariant(format!(
                    "{} lemma check rows failed",
                    outcome.failures
                )));
            }
            Ok(())
        }
        Cmd::Diagnose { run_dir, tolerance } => {
            let outcome = bqpatch_cli::diagnose::diagnose(&run_dir, tolerance)?;
            println!(
                "recomputed {} snapshots ({} matched against recorded rows), \
                 max relative deviation {:.3e}",
                outcome.snapshots, outcome.compared, outcome.max_rel_dev
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
