//! Command-line front end for `nclass-core`.
//!
//! Every command produces a JSON document with a `meta` block recording the
//! QFI convention, the quadrature convention and the truncation used. Scans
//! additionally have a CSV form. Output is a deterministic function of the
//! command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod input;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliResult;
use crate::input::StateArgs;
use crate::output::{Format, Output};

#[derive(Debug, Parser)]
#[command(
    name = "nclass",
    version,
    about = "Quadrature QFI, metrological power and nonclassicality of bosonic states"
)]
pub struct Cli {
    #[command(flatten)]
    pub run: RunConfig,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Fock truncation; defaults to the smallest adequate dimension
    #[arg(long, global = true)]
    pub dim: Option<usize>,

    /// Stall tolerance of the convex-roof search
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,

    /// Seed of the convex-roof search
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Starts per ensemble size in the convex-roof search
    #[arg(long, global = true, default_value_t = 32)]
    pub restarts: usize,

    /// Emit JSON (the default for everything except scans)
    #[arg(long, global = true, conflicts_with_all = ["csv", "format"])]
    pub json: bool,

    /// Emit CSV (scans and table1 only)
    #[arg(long, global = true, conflicts_with = "format")]
    pub csv: bool,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Rerun internal cross-checks and exit with status 3 on any violation
    #[arg(long, global = true)]
    pub verify: bool,
}

impl RunConfig {
    pub fn format(&self, default: Format) -> Format {
        if let Some(f) = self.format {
            f
        } else if self.csv {
            Format::Csv
        } else if self.json {
            Format::Json
        } else {
            default
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Metrological power, nonclassicality and moments of one state
    Measure(StateArgs),
    /// Nonclassicality of standard pure-state families against closed forms
    Table1,
    /// Deterministic parameter scans
    Scan(ScanArgs),
    /// Mach-Zehnder interferometer QFI, witness and precision bounds
    Mzi(MziArgs),
    /// Macroscopicity sums of a coherent-state superposition
    Macro(StateArgs),
    /// Convex-roof search for a mixed state
    Roof(StateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ScanKind {
    /// W(rho(p)) on p = 0, 0.01, ..., 1
    RhoP,
    /// Interferometer QFI against the first splitter's transmission
    MziTau,
    /// Interferometer QFI against the reference phase
    MziPhi,
    /// Squeezed vacuum with an equal-energy reference at nbar = 4, 8, 16, 32
    Heisenberg,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(value_enum)]
    pub what: ScanKind,

    /// Signal state for the interferometer scans
    #[arg(long, default_value = "fock:1")]
    pub state: String,

    /// Reference amplitude for the interferometer scans
    #[arg(long, default_value = "2")]
    pub alpha_r: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MziScan {
    Tau,
    Phi,
}

#[derive(Debug, Clone, Args)]
pub struct MziArgs {
    #[command(flatten)]
    pub state: StateArgs,

    /// Reference amplitude alpha_r = |alpha_r| e^{-i phi}
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_r: String,

    /// Keep |alpha_r| but rotate its phase to the optimal quadrature
    #[arg(long)]
    pub align: bool,

    /// Transmission of the first beam splitter
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,

    /// Emit a scan instead of a single report
    #[arg(long, value_enum)]
    pub scan: Option<MziScan>,

    /// Number of repetitions M in the Cramer-Rao bound
    #[arg(long, default_value_t = 1)]
    pub reps: u64,

    /// Phase variance at which to also evaluate the nonclassicality lower bound
    #[arg(long)]
    pub delta2: Option<f64>,
}

/// Runs one parsed command line.
pub fn run(cli: &Cli) -> CliResult<(Output, Format)> {
    let cfg = &cli.run;
    let out = match &cli.command {
        Command::Measure(a) => commands::measure(cfg, a)?,
        Command::Table1 => commands::table1(cfg)?,
        Command::Scan(a) => commands::scan(cfg, a)?,
        Command::Mzi(a) => commands::mzi(cfg, a)?,
        Command::Macro(a) => commands::macro_cmd(cfg, a)?,
        Command::Roof(a) => commands::roof(cfg, a)?,
    };
    let format = cfg.format(out.default_format);
    Ok((out, format))
}
