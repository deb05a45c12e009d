use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use weylcouple::pipeline::{self, GridSpec, Report, ScenarioConfig, Status};

/// Regularity analysis of couplings given by a pair of Weyl functions.
#[derive(Parser)]
#[command(name = "weylcouple", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline on a scenario config and print the JSON report.
    Analyze { config: PathBuf },
    /// Run a built-in example and check its expected verdict.
    Example {
        /// One of: smooth-coefficients, short-range-potential, power-weights, singular-zero, quarter-power-coupling
        id: String,
    },
    /// Write a CSV grid of m(iy) or of the D-ratio.
    Grid { spec: PathBuf },
}

fn report_exit(report: &Report) -> ExitCode {
    print!("{}", report.to_json());
    match report.status {
        Status::Fail => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze { config } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = ScenarioConfig::from_json(&text)?;
            Ok(report_exit(&pipeline::run_analyze(&cfg)?))
        }
        Command::Example { id } => Ok(report_exit(&pipeline::run_example(&id)?)),
        Command::Grid { spec } => {
            let text = std::fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let g: GridSpec = serde_json::from_str(&text).context("parsing grid spec")?;
            let csv = pipeline::emit_grid(&g)?;
            match &g.output {
                Some(path) => std::fs::write(path, csv).with_context(|| format!("writing {path}"))?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for FAIL here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
