use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hwtm_cli::{cmd_resources, cmd_run, cmd_sweep, CliError, ModeSel, TaskRange};

/// Co-simulate a hardware and a software RTOS time manager.
#[derive(Debug, Parser)]
#[command(name = "hwtm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario; writes trace_<mode>.csv and report.csv.
    Run {
        /// Scenario file (TOML). Defaults to the embedded reference platform.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the mode given in the scenario.
        #[arg(long, value_enum)]
        mode: Option<ModeSel>,
        /// Reserved; the simulator is deterministic and ignores it.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep the task count; writes sweep_latency.csv and sweep_report.csv.
    Sweep {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Inclusive range of task counts, e.g. 1..12.
        #[arg(long)]
        tasks: String,
        #[arg(long)]
        out: PathBuf,
        /// Reserved; the simulator is deterministic and ignores it.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the FPGA resource estimate as CSV.
    Resources {
        /// Inclusive range of task counts, e.g. 1..12.
        #[arg(long)]
        tasks: String,
        /// Counter width in bits.
        #[arg(long, default_value_t = 64)]
        width: u32,
        /// Write the table to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn range(s: &str) -> Result<TaskRange, CliError> {
    s.parse().map_err(|e| CliError::Validation(format!("--tasks: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let written = match cli.command {
        Command::Run {
            scenario, out, mode, ..
        } => cmd_run(scenario.as_deref(), &out, mode)?,
        Command::Sweep {
            scenario, tasks, out, ..
        } => cmd_sweep(scenario.as_deref(), range(&tasks)?, &out)?,
        Command::Resources { tasks, width, out } => {
            let csv = cmd_resources(range(&tasks)?, width)?;
            match out {
                None => {
                    print!("{csv}");
                    return Ok(());
                }
                Some(path) => {
                    std::fs::write(&path, csv).map_err(|e| CliError::io(&path, e))?;
                    vec![path]
                }
            }
        }
    };
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
