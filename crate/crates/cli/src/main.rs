//! `diracsc`: semiclassical Dirac resolvent kernels from the command line.

mod commands;
mod config;
mod csv;
mod error;
mod selfcheck;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{parse_h_list, RunConfig};
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "diracsc", version, about = "Semiclassical Dirac resolvent kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file (stdout when absent and the config names none).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated semiclassical parameters, overriding the config.
    #[arg(long)]
    h_list: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    Clifford,
}

#[derive(Subcommand)]
enum Command {
    /// Run the built-in consistency checks.
    Selfcheck {
        #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 3])]
        dim: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_fault: Option<FaultArg>,
    },
    /// Minimizing geodesic and its determinants as JSON.
    Geodesic(RunArgs),
    /// Leading-order kernel over the h list as CSV.
    Kernel(RunArgs),
    /// One-dimensional convergence study against the ODE oracle.
    Validate1d(RunArgs),
    /// Exact constant-potential kernel with ratios.
    Constant(RunArgs),
    /// Spin precession along the geodesic (d = 3).
    Bmt(RunArgs),
}

fn write_output(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(args: &RunArgs) -> Result<(RunConfig, Option<PathBuf>), CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(list) = &args.h_list {
        cfg.h_list = parse_h_list(list)?;
        cfg.validate()?;
    }
    let out = args.out.clone().or_else(|| cfg.output.clone().map(PathBuf::from));
    Ok((cfg, out))
}

/// Writes `text`, then turns a failed validation into exit code 1.
fn finish((text, reason): (String, Option<String>), out: Option<&PathBuf>) -> Result<(), CliError> {
    write_output(&text, out)?;
    match reason {
        Some(r) => Err(CliError::Validation(r)),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Selfcheck { dim, out, inject_fault } => {
            if dim.is_empty() || dim.contains(&0) {
                return Err(CliError::Config("dimensions must be positive".into()));
            }
            let fault = inject_fault.map(|FaultArg::Clifford| selfcheck::Fault::Clifford);
            let report = selfcheck::run(&dim, fault);
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            write_output(&text, out.as_ref())?;
            if report.all_pass() {
                Ok(())
            } else {
                let names: Vec<String> = report
                    .checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| format!("{} (d = {})", c.name, c.dimension))
                    .collect();
                Err(CliError::Validation(format!("failed checks: {}", names.join(", "))))
            }
        }
        Command::Geodesic(args) => {
            let (cfg, out) = load(&args)?;
            write_output(&commands::geodesic(&cfg)?, out.as_ref())
        }
        Command::Kernel(args) => {
            let (cfg, out) = load(&args)?;
            write_output(&commands::kernel(&cfg)?, out.as_ref())
        }
        Command::Constant(args) => {
            let (cfg, out) = load(&args)?;
            write_output(&commands::constant(&cfg)?, out.as_ref())
        }
        Command::Validate1d(args) => {
            let (cfg, out) = load(&args)?;
            finish(commands::validate1d(&cfg)?, out.as_ref())
        }
        Command::Bmt(args) => {
            let (cfg, out) = load(&args)?;
            finish(commands::bmt(&cfg)?, out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("diracsc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
