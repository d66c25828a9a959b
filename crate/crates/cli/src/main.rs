use clap::{Parser, Subcommand};
use sl_spectra_cli::{basis_check, compare, near_degenerate_warning, spectrum, CliError, Report, RunArgs};
use std::io::Write;
use std::process::ExitCode;

/// Spectra, asymptotic estimates and basis diagnostics for Sturm–Liouville
/// operators with regular but not strongly regular boundary conditions.
#[derive(Parser)]
#[command(name = "sl-spectra", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues with multiplicities in each disk |λ − base_n| ≤ n.
    Spectrum(RunArgs),
    /// Solver eigenvalues against leading and refined asymptotic estimates.
    Compare(RunArgs),
    /// Eigenfunction overlaps, normalization identity and residuals.
    BasisCheck(RunArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SL_SPECTRA_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("SL_SPECTRA_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (args, cmd): (&RunArgs, fn(&_) -> Result<Report, CliError>) = match &cli.command {
        Command::Spectrum(a) => (a, spectrum),
        Command::Compare(a) => (a, compare),
        Command::BasisCheck(a) => (a, basis_check),
    };
    let cfg = args.validate()?;
    if let Some(w) = near_degenerate_warning(&cfg.spec) {
        eprintln!("{w}");
    }
    let report = cmd(&cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &report.body)?,
        None => std::io::stdout().write_all(report.body.as_bytes())?,
    }
    for m in &report.messages {
        eprintln!("{m}");
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
