//! Command implementations behind the `sl-spectra` binary.
//!
//! Each command returns a [`Report`]: the table or JSON document destined for
//! `--out` (or stdout) plus status lines for stderr. The binary only parses
//! arguments, prints, and maps errors to exit codes.

pub mod commands;
pub mod table;

use num_complex::Complex64;
use sl_spectra::boundary::OperatorSpec;
use sl_spectra::potential::{standard_even_potential, standard_odd_potential, TrigPotential};
use std::path::PathBuf;

pub use commands::{basis_check, compare, spectrum};
pub use table::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, spec strings, potential files or tolerances.
    #[error("configuration error: {0}")]
    Config(String),
    /// A disk or iteration failed.
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Reference {
    Periodic,
    Antiperiodic,
}

impl Reference {
    pub fn spec(self) -> OperatorSpec {
        match self {
            Reference::Periodic => OperatorSpec::periodic(),
            Reference::Antiperiodic => OperatorSpec::antiperiodic(),
        }
    }
}

/// Validated run configuration shared by all commands.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub spec: OperatorSpec,
    pub potential: TrigPotential,
    pub n_min: u32,
    pub n_max: u32,
    pub order: usize,
    pub cutoff: Option<usize>,
    pub tol: f64,
    pub fp_tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub compare: Option<Reference>,
    pub partial: bool,
}

/// Raw values as typed on the command line.
#[derive(Clone, Debug, clap::Args)]
pub struct RunArgs {
    /// Operator, e.g. `T1:beta=3+0i`, `T3:alpha=0.5`, `periodic`.
    #[arg(long)]
    pub spec: String,
    /// Potential JSON file, or one of `zero`, `standard-even`, `standard-odd`.
    #[arg(long, default_value = "zero")]
    pub potential: String,
    #[arg(long, default_value_t = 1)]
    pub n_min: u32,
    #[arg(long, default_value_t = 10)]
    pub n_max: u32,
    /// Series order k of the refinement (at most 3).
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    /// Series cutoff K_max; defaults to n + degree + 8 per index.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Newton tolerance of the eigenvalue solver.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Stopping tolerance of the fixed-point refinement.
    #[arg(long, default_value_t = 1e-10)]
    pub fp_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reference spectrum for a per-disk Hausdorff deviation column.
    #[arg(long, value_enum)]
    pub compare: Option<Reference>,
    /// Skip failed disks instead of exiting with status 1.
    #[arg(long)]
    pub partial: bool,
}

pub fn load_potential(arg: &str) -> Result<TrigPotential, CliError> {
    match arg {
        "zero" => Ok(TrigPotential::zero()),
        "standard-even" => Ok(standard_even_potential()),
        "standard-odd" => Ok(standard_odd_potential()),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read potential file {path}: {e}")))?;
            TrigPotential::from_json_str(&text).map_err(|e| CliError::Config(e.to_string()))
        }
    }
}

impl RunArgs {
    pub fn validate(&self) -> Result<RunConfig, CliError> {
        let spec: OperatorSpec = self
            .spec
            .parse()
            .map_err(|e: sl_spectra::Error| CliError::Config(e.to_string()))?;
        let potential = load_potential(&self.potential)?;
        if self.n_min > self.n_max {
            return Err(CliError::Config(format!(
                "n-min {} exceeds n-max {}",
                self.n_min, self.n_max
            )));
        }
        for (name, v) in [("tol", self.tol), ("fp-tol", self.fp_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.order > sl_spectra::asymptotics::MAX_ORDER {
            return Err(CliError::Config(format!(
                "order {} exceeds the supported maximum of {}",
                self.order,
                sl_spectra::asymptotics::MAX_ORDER
            )));
        }
        if let Some(k) = self.cutoff {
            if k <= self.n_max as usize {
                return Err(CliError::Config(format!("cutoff {k} must exceed n-max {}", self.n_max)));
            }
        }
        Ok(RunConfig {
            spec,
            potential,
            n_min: self.n_min,
            n_max: self.n_max,
            order: self.order,
            cutoff: self.cutoff,
            tol: self.tol,
            fp_tol: self.fp_tol,
            format: self.format,
            out: self.out.clone(),
            compare: self.compare,
            partial: self.partial,
        })
    }
}

/// Warning for parameters within `1e-6` of the excluded values `±1`.
pub fn near_degenerate_warning(spec: &OperatorSpec) -> Option<String> {
    match spec.degeneracy_distance() {
        Some(d) if d < 1e-6 => Some(format!(
            "warning: {spec} is within {d:.1e} of a degenerate parameter (±1); results may be meaningless"
        )),
        _ => None,
    }
}

/// Command output: the document and status lines.
#[derive(Clone, Debug)]
pub struct Report {
    pub body: String,
    pub messages: Vec<String>,
}

pub(crate) fn complex_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}
