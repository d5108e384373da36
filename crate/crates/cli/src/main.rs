//! `runlength`: batch access to run waiting-time moments, tree path sums,
//! identity sweeps, spectra and simulation.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use runlength_core::spectral::{DEFAULT_RESIDUAL_TOL, DEFAULT_RHO_TOL};
use runlength_core::tree::{DEFAULT_EDGE_CAP, DEFAULT_PAIR_CAP};
use runlength_core::{Params, RootOptions};

use commands::{CliError, MomentMethod, Outcome, SequenceName, TreeMethodArg};
use output::Format;

#[derive(Parser)]
#[command(name = "runlength", version, about = "Waiting times for symbol runs and path sums of complete m-ary trees")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write output to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact E, E[ξ²] and Var of the waiting time.
    Moments {
        m: u32,
        n: u32,
        #[arg(long, value_enum, default_value_t = MomentMethod::Both)]
        method: MomentMethod,
    },
    /// Edge count, path sum and per-depth pair counts of the complete m-ary tree.
    Tree {
        m: u32,
        n: u32,
        #[arg(long, value_enum, default_value_t = TreeMethodArg::All)]
        method: TreeMethodArg,
        /// Largest node count accepted by pair enumeration.
        #[arg(long, default_value_t = DEFAULT_PAIR_CAP)]
        pair_cap: u64,
        /// Largest node count accepted by the per-edge route.
        #[arg(long, default_value_t = DEFAULT_EDGE_CAP)]
        edge_cap: u64,
    },
    /// Check E = T and Var = (m-1)·S on every cell of a grid.
    Verify {
        m_max: u32,
        n_max: u32,
        /// Largest n on which the matrix route is also checked.
        #[arg(long, default_value_t = 8)]
        matrix_n_max: u32,
    },
    /// Print the first COUNT terms of an integer sequence.
    Sequence { name: SequenceName, count: u32 },
    /// Exact waiting-time probabilities until the remaining mass is at most the tail.
    Distribution {
        m: u32,
        n: u32,
        /// Tail bound as an integer, decimal or p/q.
        #[arg(long, default_value = "1e-6")]
        tail: String,
    },
    /// Characteristic roots, spectral radius and the root-modulus bound.
    Spectrum {
        m: u32,
        n: u32,
        #[arg(long, default_value_t = DEFAULT_RESIDUAL_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 0.0)]
        margin_tol: f64,
        #[arg(long, default_value_t = DEFAULT_RHO_TOL)]
        rho_tol: f64,
    },
    /// Seeded Monte Carlo estimate of the waiting-time mean and variance.
    Simulate { m: u32, n: u32, trials: u64, seed: u64 },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("RUNLENGTH_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("RUNLENGTH_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Failure(e.to_string()))
}

fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Moments { m, n, method } => commands::moments(Params::new(m, n)?, method),
        Command::Tree { m, n, method, pair_cap, edge_cap } => {
            commands::tree(Params::new(m, n)?, method, pair_cap, edge_cap)
        }
        Command::Verify { m_max, n_max, matrix_n_max } => commands::verify(m_max, n_max, matrix_n_max),
        Command::Sequence { name, count } => commands::sequence(name, count),
        Command::Distribution { m, n, tail } => commands::distribution_cmd(Params::new(m, n)?, &tail),
        Command::Spectrum { m, n, tol, margin_tol, rho_tol } => commands::spectrum(
            Params::new(m, n)?,
            RootOptions { residual_tol: tol, margin_tol, rho_tol },
        ),
        Command::Simulate { m, n, trials, seed } => commands::simulate(Params::new(m, n)?, trials, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| run(cli.command));
    match outcome {
        Ok(Outcome { envelope, verified }) => {
            let text = envelope.render(cli.format);
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                }
                None => print!("{text}"),
            }
            if verified {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: verification failed for `{}`", envelope.command);
                ExitCode::from(3)
            }
        }
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
