//! `krylov-gauss`: spread complexity and Fock-space bounds of Gaussian
//! states from the command line.

mod commands;
mod config;
mod error;
mod svg;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::config::{FormatArg, Params, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "krylov-gauss", version, about = "Krylov spread complexity of Gaussian states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spread complexity C(t) of a coherent, squeezed or two-mode state.
    Complexity(Params),
    /// Fock-space bound swept along the family's primary axis.
    Bound(Params),
    /// Survival-amplitude moments and the Lanczos coefficients they fix.
    Moments(Params),
    /// Repeat a computation over several values of one parameter.
    Sweep(SweepArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
    /// Draw a CSV table or an inline computation as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// `NAME=V1,V2,...`
    #[arg(long)]
    vary: String,
    #[command(flatten)]
    params: Params,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Coarse grids; skips the exact-arithmetic checks.
    #[arg(long)]
    fast: bool,
    /// Run only this criterion (repeatable).
    #[arg(long)]
    criterion: Vec<usize>,
    /// Perturb the moment-route b² by 1%.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// CSV produced by an earlier run.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Comma-separated columns to draw.
    #[arg(long)]
    columns: Option<String>,
    #[command(flatten)]
    params: Params,
}

fn table_command(
    params: &Params,
    title: &str,
    run: impl FnOnce(&RunConfig) -> CliResult<table::CsvTable>,
) -> CliResult<()> {
    let cfg = RunConfig::resolve(params)?;
    let table = run(&cfg)?;
    let text = commands::render(&table, cfg.format, None, title)?;
    commands::emit(&text, cfg.output.as_deref())
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Complexity(p) => table_command(&p, "spread complexity", commands::complexity)?,
        Command::Bound(p) => table_command(&p, "Fock-space bound", commands::bound)?,
        Command::Moments(p) => table_command(&p, "moments", commands::moments)?,
        Command::Sweep(a) => table_command(&a.params, "sweep", |cfg| commands::sweep(cfg, &a.vary))?,
        Command::Verify(a) => {
            let (report, pass) = commands::verify(&a.criterion, a.fast, a.inject_fault)?;
            commands::emit(&report, None)?;
            if !pass {
                eprintln!("KG-VERIFY-FAILED: at least one criterion failed");
                return Ok(ExitCode::from(2));
            }
        }
        Command::Plot(a) => {
            let mut cfg = RunConfig::resolve(&a.params)?;
            if a.params.format.is_none() {
                cfg.format = FormatArg::Svg;
            }
            let table = commands::plot_table(&cfg, a.input.as_deref())?;
            let title = a
                .input
                .as_ref()
                .and_then(|p| p.file_name())
                .map(|n| n.to_string_lossy().into_owned())
                .or_else(|| cfg.family.map(|f| commands::family_label(f).to_string()))
                .unwrap_or_default();
            let text = commands::render(&table, cfg.format, a.columns.as_deref(), &title)?;
            commands::emit(&text, cfg.output.as_deref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let err = CliError::Validation(first.trim_start_matches("error: ").to_string());
            eprintln!("{}: {err}", err.code());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{}: {err}", err.code());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
