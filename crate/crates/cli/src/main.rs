//! `blockade`: steady states, trajectories, sweeps, figure presets and
//! truncation audits for two driven qubits in a lossy cavity.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ModelArgs;

#[derive(Parser, Debug)]
#[command(name = "blockade", version, about = "Cavity-induced dipole blockade simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Steady state at one parameter point.
    Steady {
        #[command(flatten)]
        model: ModelArgs,
        /// Write the record as CSV.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write the full density matrix as (row, col, re, im).
        #[arg(long)]
        rho: Option<PathBuf>,
    },
    /// Propagate |gg,0⟩ and record observables.
    Evolve {
        #[command(flatten)]
        model: ModelArgs,
        /// Final time in units of 1/κ.
        #[arg(long)]
        t_end: Option<f64>,
        /// Output interval in units of 1/κ.
        #[arg(long)]
        dt_out: Option<f64>,
        #[arg(long, default_value = "trajectory.csv")]
        output: PathBuf,
    },
    /// Custom 1-D or 2-D parameter sweep.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, default_value = "sweep.csv")]
        output: PathBuf,
    },
    /// Reproduce a figure panel.
    Figure {
        /// One of fig2, fig2-inset, fig3, fig3-inset, fig4, fig5a, fig5b.
        name: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Physical value of κ; output times in units of 1/κ are divided by it.
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Double n_max until the steady state stops changing.
    Converge {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated observables to monitor.
        #[arg(long, value_delimiter = ',')]
        observables: Option<Vec<String>>,
    },
}

#[derive(clap::Args, Debug)]
struct SweepArgs {
    /// `name=lo:hi:n[:log]` or `name=v1,v2,...`.
    #[arg(long)]
    axis1: Option<String>,
    #[arg(long)]
    axis2: Option<String>,
    /// `steady` or `evolve`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dt_out: Option<f64>,
    /// Tie the drive to the decay rate at every grid point.
    #[arg(long)]
    eta_over_gamma: Option<f64>,
    /// Comma-separated observables checked by the sentinel rerun.
    #[arg(long, value_delimiter = ',')]
    observables: Option<Vec<String>>,
    /// Grid points rerun at doubled n_max (0 disables).
    #[arg(long, default_value_t = 5)]
    sentinels: usize,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, parameters or destinations: exit code 2.
    Usage(String),
    /// Solver failure: exit code 3.
    Numerical(String),
}

impl From<cavity_blockade::error::Error> for CliError {
    fn from(e: cavity_blockade::error::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Steady { model, output, rho } => commands::steady(&model, output, rho),
        Command::Evolve { model, t_end, dt_out, output } => commands::evolve(&model, t_end, dt_out, &output),
        Command::Sweep { model, sweep, output } => commands::sweep(&model, &sweep, &output),
        Command::Figure { name, out_dir, workers, kappa } => commands::figure(&name, &out_dir, workers, kappa),
        Command::Converge { model, observables } => commands::converge(&model, observables),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
