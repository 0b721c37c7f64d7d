use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use percspec::Complex64;
use percspec_cli::{
    cmd_compare, cmd_conditions, cmd_edges, cmd_oracle, cmd_simulate, cmd_solve, parse_complex,
    CliError, CommandOutput, RunArgs, RunConfig,
};

/// Spectra of percolated lattice graphs.
#[derive(Debug, Parser)]
#[command(name = "percspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Deterministic density and CDF from the canonical equation.
    Solve(RunArgs),
    /// Averaged empirical spectrum over Monte Carlo samples.
    Simulate(RunArgs),
    /// Deterministic against empirical curves, with distances.
    Compare(RunArgs),
    /// Scalar solver against the dense matrix iteration (small lattices).
    Oracle {
        #[command(flatten)]
        args: RunArgs,
        /// Spectral parameters such as `0.2+0.7i`; defaults to a 25-point grid.
        #[arg(long, value_delimiter = ',', value_parser = parse_complex)]
        z: Vec<Complex64>,
    },
    /// Condition values of the limit theorem for the scaled adjacency.
    Conditions(RunArgs),
    /// Edge list of one sampled graph.
    Edges(RunArgs),
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (args, output) = match &cli.command {
        Command::Solve(a) => (a, cmd_solve as fn(&RunConfig) -> _),
        Command::Simulate(a) => (a, cmd_simulate as fn(&RunConfig) -> _),
        Command::Compare(a) => (a, cmd_compare as fn(&RunConfig) -> _),
        Command::Conditions(a) => (a, cmd_conditions as fn(&RunConfig) -> _),
        Command::Edges(a) => (a, cmd_edges as fn(&RunConfig) -> _),
        Command::Oracle { args, z } => {
            let cfg = RunConfig::resolve(args)?;
            return emit(&cfg, cmd_oracle(&cfg, z)?);
        }
    };
    let cfg = RunConfig::resolve(args)?;
    emit(&cfg, output(&cfg)?)
}

fn emit(cfg: &RunConfig, out: CommandOutput) -> Result<u8, CliError> {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let report_to_stderr = out.csv.is_some() && cfg.output_path.is_none();
    if let Some(csv) = &out.csv {
        match &cfg.output_path {
            Some(path) => fs::write(path, csv).map_err(CliError::io)?,
            None => stdout.lock().write_all(csv.as_bytes()).map_err(CliError::io)?,
        }
    }
    for line in &out.report {
        if report_to_stderr {
            writeln!(stderr.lock(), "{line}").map_err(CliError::io)?;
        } else {
            writeln!(stdout.lock(), "{line}").map_err(CliError::io)?;
        }
    }
    Ok(out.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code)
        }
    }
}
