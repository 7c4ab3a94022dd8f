// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

//! `qwalk`: run walk experiments from JSON configs.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwalk::analysis::Metric;
use qwalk::engine::{LatticeKind, Mode, ShiftSign};
use serde::de::DeserializeOwned;

use commands::{FitRequest, OracleRequest, Overrides, SeriesSource};
use error::{usage, CliError};

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Discrete-time quantum walks on line, square and graphene lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve a config and write its distribution CSVs and a manifest.
    Run(RunArgs),
    /// Sample variance against time, fit a quadratic and optionally compare.
    Variance(VarianceArgs),
    /// Print a coin, its spin Hamiltonian and consistency residuals as JSON.
    Derive {
        /// Coin name, with parameters if any: `grover4`, `so2(0.5)`, `identity(2)`.
        coin: String,
    },
    /// Check the step kernels against a dense evolution operator.
    OracleCheck(OracleArgs),
    /// List the named coins.
    ListCoins {
        #[arg(long)]
        json: bool,
    },
}

/// Parses a kebab-case enum value through its serde representation.
fn kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
struct OverrideArgs {
    /// Position metric for variance: index or euclidean.
    #[arg(long, value_parser = kebab::<Metric>)]
    metric: Option<Metric>,
    /// Shift direction convention: paper or mirrored.
    #[arg(long, value_parser = kebab::<ShiftSign>)]
    shift_sign: Option<ShiftSign>,
}

impl From<&OverrideArgs> for Overrides {
    fn from(a: &OverrideArgs) -> Self {
        Overrides { metric: a.metric, shift_sign: a.shift_sign }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write the final amplitudes as `<stem>_state.json`.
    #[arg(long)]
    snapshot: bool,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Debug, Args)]
struct VarianceArgs {
    #[arg(long, required_unless_present = "series", conflicts_with = "series")]
    config: Option<PathBuf>,
    /// Fit an existing `t,variance` CSV instead of running a config; `-` reads stdin.
    #[arg(long)]
    series: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Reference coefficients `c0,c1,c2` of `c0 + c1·t + c2·t²`.
    #[arg(long, value_parser = commands::parse_reference, allow_hyphen_values = true)]
    reference: Option<[f64; 3]>,
    /// Relative tolerance on c2 (default 0.02 when no tolerance is given).
    #[arg(long, requires = "reference")]
    tol_rel: Option<f64>,
    /// Absolute tolerance on c2.
    #[arg(long, requires = "reference")]
    tol_abs: Option<f64>,
    /// Apply the tolerance to c0 and c1 too.
    #[arg(long, requires = "reference")]
    gate_all: bool,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long, value_parser = kebab::<LatticeKind>)]
    lattice: LatticeKind,
    #[arg(long, value_parser = kebab::<Mode>, default_value = "additive")]
    mode: Mode,
    #[arg(long)]
    coin: String,
    /// Half-width R of the periodic test lattice.
    #[arg(long, default_value_t = 3)]
    extent: i64,
    #[arg(long, default_value_t = 3)]
    steps: usize,
    #[arg(long, default_value_t = 3)]
    probes: u64,
    #[arg(long, value_parser = kebab::<ShiftSign>, default_value = "paper")]
    shift_sign: ShiftSign,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QWALK_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("QWALK_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(usage)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Run(a) => commands::run(&a.config, &a.out, (&a.overrides).into(), a.snapshot),
        Command::Variance(a) => {
            let source = match (a.config, a.series) {
                (Some(c), _) => SeriesSource::Config(c),
                (None, Some(s)) => SeriesSource::Csv(s),
                (None, None) => unreachable!("clap requires one of --config and --series"),
            };
            let request = FitRequest { reference: a.reference, tol_rel: a.tol_rel, tol_abs: a.tol_abs, gate_all: a.gate_all };
            commands::variance(&source, &a.out, (&a.overrides).into(), &request)
        }
        Command::Derive { coin } => commands::derive(&coin),
        Command::OracleCheck(a) => commands::oracle(&OracleRequest {
            kind: a.lattice,
            mode: a.mode,
            coin: a.coin,
            extent: a.extent,
            shift_sign: a.shift_sign,
            steps: a.steps,
            probes: a.probes,
        }),
        Command::ListCoins { json } => commands::list_coins(json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qwalk: {e}");
            e.exit_code()
        }
    }
}
