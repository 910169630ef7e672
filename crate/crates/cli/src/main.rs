//! `cutsphere`: run the cutting-spheres solvers from a config file.
//!
//! Exit codes: 0 feasible, 2 lower bound only (or oracle budget exceeded),
//! 3 uncertified, 1 any error. Log verbosity follows `RUST_LOG`.

mod config;
mod export;
mod oracle_cmd;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use oracle_cmd::OracleCommand;

#[derive(Parser)]
#[command(name = "cutsphere", version, about = "Cutting-spheres outer approximation solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a TOML (or .json) config.
    Solve {
        config: PathBuf,
        /// JSONL trace output; overrides `output.trace`.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// JSON result output; overrides `output.result`.
        #[arg(long)]
        result: Option<PathBuf>,
    },
    /// Convert a JSONL trace to plot-ready data.
    TraceExport {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Reference solvers for small instances.
    #[command(subcommand)]
    Oracle(OracleSub),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Subcommand)]
enum OracleSub {
    /// Global minimum of ‖x − z‖² outside a set of cuts, by grid search.
    Sqcqp { input: PathBuf },
    /// Projection onto a polyhedron by active-set enumeration.
    Project { input: PathBuf },
    /// Vertices of a bounded polyhedron.
    Vertices { input: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve { config, trace, result } => solve::cmd_solve(&solve::SolveArgs {
            config: config.clone(),
            trace: trace.clone(),
            result: result.clone(),
        }),
        Command::TraceExport { input, format: Format::Csv, output } => {
            export::cmd_trace_export(input, output.as_deref())
        }
        Command::Oracle(sub) => oracle_cmd::cmd_oracle(match sub {
            OracleSub::Sqcqp { input } => OracleCommand::Sqcqp(input),
            OracleSub::Project { input } => OracleCommand::Project(input),
            OracleSub::Vertices { input } => OracleCommand::Vertices(input),
        }),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
