//! `cwlab`: convergence tables, phase data and verification reports for the
//! Curie-Weiss model, as CSV or JSON.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
//! 3 numerical failure.

mod commands;
mod grid;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use commands::SampleMethod;
use grid::{parse_int_grid, parse_real_grid, GridError};
use output::{Format, Table};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Model(cwlab::Error),
    Io(io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Model(e) if e.is_numeric() => 3,
            CliError::Model(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Model(e) => e.fmt(f),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<cwlab::Error> for CliError {
    fn from(e: cwlab::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        CliError::Config(e.0)
    }
}

const GRID_HELP: &str = "value, list a,b,c, geometric min:max:xF, or linear min:max:+d";

#[derive(Debug, Parser)]
#[command(
    name = "cwlab",
    version,
    about = "Curie-Weiss model: exact, asymptotic and sampled statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "CWLAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// E[X_1⋯X_ℓ]: exact, via the integral representation, and asymptotic.
    Correlations {
        #[arg(long, help = GRID_HELP)]
        beta: String,
        #[arg(long, help = GRID_HELP)]
        n: String,
        #[arg(long, default_value = "2", help = GRID_HELP)]
        ell: String,
    },
    /// E[(S_N/N^α)^K]: exact, assembled from correlations, and in the limit.
    Moments {
        #[arg(long, help = GRID_HELP)]
        beta: String,
        #[arg(long, help = GRID_HELP)]
        n: String,
        #[arg(long, default_value = "2", help = GRID_HELP)]
        k: String,
        /// Scaling exponent (default: 1/2, 3/4 or 1 below, at or above β = 1).
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Exact moments against the moments of the limit law along an N grid.
    LimitCheck {
        #[arg(long, help = GRID_HELP)]
        beta: String,
        #[arg(long, help = GRID_HELP)]
        n: String,
        #[arg(long, default_value = "2", help = GRID_HELP)]
        k: String,
        /// Scaling exponent (default: 1/2, 3/4 or 1 below, at or above β = 1).
        #[arg(long)]
        alpha: Option<f64>,
        /// Relative tolerance for the convergence summary.
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
    },
    /// Histogram of sampled magnetizations next to the exact distribution.
    Sample {
        #[arg(long, help = GRID_HELP)]
        beta: String,
        #[arg(long, help = GRID_HELP)]
        n: String,
        /// Draws (exact) or recorded sweeps (glauber).
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "exact")]
        method: SampleMethod,
        /// Sweeps discarded before recording (glauber only).
        #[arg(long, default_value_t = 1_000)]
        burn_in: usize,
    },
    /// Spontaneous magnetization m(β) across a β grid.
    Phase {
        #[arg(long, default_value = "0.2:3.0:+0.1", help = GRID_HELP)]
        beta: String,
    },
    /// Laplace approximation of the integral representation against quadrature.
    LaplaceCheck {
        #[arg(long, help = GRID_HELP)]
        beta: String,
        #[arg(long, help = GRID_HELP)]
        n: String,
        #[arg(long, default_value = "2", help = GRID_HELP)]
        ell: String,
    },
    /// Multiindex counts w(r), w⁰(r), w⁺(r) with the closed form and bounds.
    Census {
        #[arg(long, help = GRID_HELP)]
        k: String,
        #[arg(long, help = GRID_HELP)]
        n: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Correlations { .. } => "correlations",
            Command::Moments { .. } => "moments",
            Command::LimitCheck { .. } => "limit-check",
            Command::Sample { .. } => "sample",
            Command::Phase { .. } => "phase",
            Command::LaplaceCheck { .. } => "laplace-check",
            Command::Census { .. } => "census",
        }
    }

    /// The command's own arguments, echoed into JSON metadata.
    fn config(&self) -> Value {
        match self {
            Command::Correlations { beta, n, ell } | Command::LaplaceCheck { beta, n, ell } => {
                json!({"beta": beta, "n": n, "ell": ell})
            }
            Command::Moments { beta, n, k, alpha } => {
                json!({"beta": beta, "n": n, "k": k, "alpha": alpha})
            }
            Command::LimitCheck {
                beta,
                n,
                k,
                alpha,
                tolerance,
            } => json!({"beta": beta, "n": n, "k": k, "alpha": alpha, "tolerance": tolerance}),
            Command::Sample {
                beta,
                n,
                samples,
                seed,
                method,
                burn_in,
            } => json!({
                "beta": beta,
                "n": n,
                "samples": samples,
                "seed": seed,
                "method": format!("{method:?}").to_lowercase(),
                "burn_in": burn_in,
            }),
            Command::Phase { beta } => json!({"beta": beta}),
            Command::Census { k, n } => json!({"k": k, "n": n}),
        }
    }
}

fn run_command(command: &Command) -> Result<Table, CliError> {
    match command {
        Command::Correlations { beta, n, ell } => commands::correlations(
            &parse_real_grid(beta)?,
            &parse_int_grid(n)?,
            &parse_int_grid(ell)?,
        ),
        Command::Moments { beta, n, k, alpha } => commands::moments(
            &parse_real_grid(beta)?,
            &parse_int_grid(n)?,
            &parse_int_grid(k)?,
            *alpha,
        ),
        Command::LimitCheck {
            beta,
            n,
            k,
            alpha,
            tolerance,
        } => {
            let (table, summary) = commands::limit_check(
                &parse_real_grid(beta)?,
                &parse_int_grid(n)?,
                &parse_int_grid(k)?,
                *alpha,
                *tolerance,
            )?;
            for line in summary {
                eprintln!("{line}");
            }
            Ok(table)
        }
        Command::Sample {
            beta,
            n,
            samples,
            seed,
            method,
            burn_in,
        } => commands::sample(
            &parse_real_grid(beta)?,
            &parse_int_grid(n)?,
            *samples,
            *seed,
            *method,
            *burn_in,
        ),
        Command::Phase { beta } => commands::phase(&parse_real_grid(beta)?),
        Command::LaplaceCheck { beta, n, ell } => commands::laplace_check(
            &parse_real_grid(beta)?,
            &parse_int_grid(n)?,
            &parse_int_grid(ell)?,
        ),
        Command::Census { k, n } => commands::census(&parse_int_grid(k)?, &parse_int_grid(n)?),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let table = pool.install(|| run_command(&cli.command))?;

    let metadata = json!({
        "command": cli.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cli.command.config(),
    });
    match &cli.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            table.write(&mut file, cli.format, metadata)?;
            file.flush()?;
        }
        None => table.write(io::stdout().lock(), cli.format, metadata)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cwlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
