use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use replica_tradeoff::analytic::OptimizerMethod;
use replica_tradeoff_cli::commands;
use replica_tradeoff_cli::output::{write_csv, Row};
use replica_tradeoff_cli::{parse_config, CliError, CliResult, RunConfig};

#[derive(Parser)]
#[command(
    name = "replica-tradeoff",
    version,
    about = "Read/write latency versus replica count"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form means, bounds and optimal replica counts.
    Analytic(Common),
    /// Discrete-event simulation at the configured n.
    Simulate(Common),
    /// Sweep n or an arrival rate over a grid.
    Sweep(Common),
    /// Exact means from truncated Markov chains (small n only).
    Exact(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    ClosedForm,
    ExactScan,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (key=value lines).
    #[arg(long)]
    config: PathBuf,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed for simulations.
    #[arg(long)]
    seed: Option<u64>,
    /// SVG chart path (sweep only).
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Write-priority optimizer.
    #[arg(long, value_enum)]
    method: Option<Method>,
}

fn load(args: &Common) -> CliResult<RunConfig> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let mut cfg = parse_config(&text, args.config.parent())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(m) = args.method {
        cfg.method = match m {
            Method::ClosedForm => OptimizerMethod::ClosedForm,
            Method::ExactScan => OptimizerMethod::ExactScan,
        };
    }
    if args.out.is_some() {
        cfg.out.clone_from(&args.out);
    }
    if args.svg.is_some() {
        cfg.svg.clone_from(&args.svg);
    }
    Ok(cfg)
}

fn emit_rows(path: Option<&Path>, rows: &[Row]) -> CliResult<()> {
    match path {
        Some(p) => write_csv(fs::File::create(p)?, rows),
        None => write_csv(io::stdout().lock(), rows),
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Analytic(args) => {
            let cfg = load(&args)?;
            let (report, rows) = commands::analytic_report(&cfg)?;
            io::stdout().lock().write_all(report.as_bytes())?;
            if let Some(p) = &cfg.out {
                emit_rows(Some(p), &rows)?;
            }
            Ok(())
        }
        Command::Simulate(args) => {
            let cfg = load(&args)?;
            emit_rows(cfg.out.as_deref(), &commands::simulate(&cfg)?)
        }
        Command::Sweep(args) => {
            let cfg = load(&args)?;
            let out = commands::sweep(&cfg)?;
            emit_rows(cfg.out.as_deref(), &out.rows)?;
            if let Some(p) = &cfg.svg {
                fs::write(p, out.svg)?;
            }
            Ok(())
        }
        Command::Exact(args) => {
            let cfg = load(&args)?;
            emit_rows(cfg.out.as_deref(), &commands::exact(&cfg)?)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.into_exit(),
    }
}
