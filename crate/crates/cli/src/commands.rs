// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qwalk::analysis::{compare_fit, quadratic_fit, variance_series, FitComparison, Metric, QuadraticFit, Tolerance, VarianceSeries};
use qwalk::coins::{involution_generator, parse_coin, registry, spin_hamiltonian};
use qwalk::engine::{
    oracle_check, Boundary, ChiralityConvention, EngineError, LatticeDescriptor, LatticeKind, Mode, ShiftSign,
};
use qwalk::matrix::{exp_minus_i_hermitian, ComplexMatrix};
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{runtime, usage, CliError};

/// Largest tolerated `|‖ψ_T‖² − ‖ψ_0‖²|` before a run counts as failed.
pub const NORM_DRIFT_LIMIT: f64 = 1e-9;
pub const ORACLE_TOL: f64 = 1e-12;
/// Relative tolerance on c2 when a reference is given without `--tol-*`.
pub const DEFAULT_TOL_REL: f64 = 0.02;

/// Config fields that command-line flags may override.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub metric: Option<Metric>,
    pub shift_sign: Option<ShiftSign>,
}

impl Overrides {
    fn apply(self, config: &mut ExperimentConfig) {
        if let Some(m) = self.metric {
            config.metric = m;
        }
        if let Some(s) = self.shift_sign {
            config.shift_sign = s;
        }
    }
}

fn load(path: &Path, overrides: Overrides) -> Result<Experiment, CliError> {
    let mut config = ExperimentConfig::load(path)?;
    overrides.apply(&mut config);
    config.validate()
}

fn write(dir: &Path, file: &str, contents: &str) -> Result<String, CliError> {
    let path = dir.join(file);
    fs::write(&path, contents).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    Ok(file.to_string())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn engine_error(e: EngineError) -> CliError {
    runtime(e)
}

#[derive(Debug, Serialize)]
struct OutputFile {
    step: usize,
    kind: &'static str,
    file: String,
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    lattice: LatticeDescriptor,
    coin: &'a str,
    operator_dim: usize,
    steps: usize,
    norm_initial: f64,
    norm_final: f64,
    norm_drift: f64,
    wall_time_seconds: f64,
    outputs: Vec<OutputFile>,
}

pub fn run(config: &Path, out: &Path, overrides: Overrides, snapshot: bool) -> Result<(), CliError> {
    let exp = load(config, overrides)?;
    let cfg = &exp.config;
    fs::create_dir_all(out).map_err(|e| runtime(format!("{}: {e}", out.display())))?;

    let started = Instant::now();
    let state = exp.initial_state().map_err(engine_error)?;
    let norm_initial = state.norm_sqr();
    let result = qwalk::engine::run(state, &exp.evolution, cfg.steps, cfg.record_every).map_err(engine_error)?;
    let wall_time_seconds = started.elapsed().as_secs_f64();
    let norm_final = result.final_state.norm_sqr();
    let norm_drift = (norm_final - norm_initial).abs();

    let stem = cfg.stem();
    let graphene = exp.lattice.kind == LatticeKind::Graphene;
    let mut outputs = Vec::new();
    if cfg.record_every > 0 {
        for (t, dist) in &result.records {
            outputs.push(OutputFile { step: *t, kind: "distribution", file: write(out, &format!("{stem}_t{t}.csv"), &dist.to_csv())? });
            if graphene {
                outputs.push(OutputFile { step: *t, kind: "euclidean", file: write(out, &format!("{stem}_t{t}_xy.csv"), &dist.to_euclidean_csv())? });
            }
        }
    }
    let (t, last) = result.records.last().expect("run records the final step");
    outputs.push(OutputFile { step: *t, kind: "distribution", file: write(out, &format!("{stem}.csv"), &last.to_csv())? });
    if graphene {
        outputs.push(OutputFile { step: *t, kind: "euclidean", file: write(out, &format!("{stem}_xy.csv"), &last.to_euclidean_csv())? });
    }
    if snapshot {
        let json = to_json(&result.final_state.snapshot());
        outputs.push(OutputFile { step: *t, kind: "state", file: write(out, &format!("{stem}_state.json"), &json)? });
    }

    let manifest = RunManifest {
        tool: "qwalk",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        lattice: exp.lattice,
        coin: &exp.evolution.coin().name,
        operator_dim: exp.evolution.operator().dim(),
        steps: cfg.steps,
        norm_initial,
        norm_final,
        norm_drift,
        wall_time_seconds,
        outputs,
    };
    write(out, &format!("{stem}_manifest.json"), &to_json(&manifest))?;
    eprintln!("{stem}: {} steps in {wall_time_seconds:.2} s, norm drift {norm_drift:e}", cfg.steps);

    if norm_drift > NORM_DRIFT_LIMIT {
        return Err(runtime(format!("norm drift {norm_drift:e} exceeds {NORM_DRIFT_LIMIT:e}")));
    }
    Ok(())
}

/// Where `variance` takes its samples from.
#[derive(Debug, Clone)]
pub enum SeriesSource {
    Config(PathBuf),
    /// A `t,variance` CSV; `-` reads standard input.
    Csv(PathBuf),
}

#[derive(Debug, Clone, Default)]
pub struct FitRequest {
    pub reference: Option<[f64; 3]>,
    pub tol_rel: Option<f64>,
    pub tol_abs: Option<f64>,
    /// Gate c0 and c1 as well as c2.
    pub gate_all: bool,
}

impl FitRequest {
    fn tolerances(&self) -> [Tolerance; 3] {
        let tol = match (self.tol_rel, self.tol_abs) {
            (None, None) => Tolerance::rel(DEFAULT_TOL_REL),
            (rel, abs) => Tolerance { rel, abs },
        };
        if self.gate_all {
            [tol; 3]
        } else {
            [Tolerance::default(), Tolerance::default(), tol]
        }
    }
}

#[derive(Debug, Serialize)]
struct FitReport<'a> {
    name: &'a str,
    metric: Metric,
    samples: usize,
    t_first: usize,
    t_last: usize,
    fit: QuadraticFit,
    comparison: Option<FitComparison>,
}

/// Parses `c0,c1,c2`.
pub fn parse_reference(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{}`: {e}", p.trim())))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|p| format!("expected three coefficients, got {}", p.len()))
}

fn read_series(path: &Path, metric: Metric) -> Result<VarianceSeries, CliError> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text).map_err(usage)?;
    } else {
        text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(usage)?.clone();
    if headers.len() < 2 || &headers[0] != "t" || &headers[1] != "variance" {
        return Err(usage(format!("{}: expected header `t,variance`", path.display())));
    }
    let mut series = VarianceSeries::new(metric);
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(usage)?;
        let bad = |e: &dyn std::fmt::Display| usage(format!("{}: row {}: {e}", path.display(), i + 1));
        let t: usize = row[0].parse().map_err(|e| bad(&e))?;
        let v: f64 = row[1].parse().map_err(|e| bad(&e))?;
        series.push(t, v).map_err(|e| bad(&e))?;
    }
    Ok(series)
}

pub fn variance(source: &SeriesSource, out: &Path, overrides: Overrides, request: &FitRequest) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| runtime(format!("{}: {e}", out.display())))?;
    let (stem, series) = match source {
        SeriesSource::Config(path) => {
            let exp = load(path, overrides)?;
            let cfg = &exp.config;
            let state = exp.initial_state().map_err(engine_error)?;
            let series = variance_series(state, &exp.evolution, cfg.steps, cfg.variance_stride, cfg.metric)
                .map_err(runtime)?;
            let stem = cfg.stem().to_string();
            write(out, &format!("{stem}_variance.csv"), &series.to_csv())?;
            (stem, series)
        }
        SeriesSource::Csv(path) => {
            let series = read_series(path, overrides.metric.unwrap_or_default())?;
            let stem = match path.file_stem().and_then(|s| s.to_str()) {
                Some(s) if path != Path::new("-") => s.to_string(),
                _ => "series".to_string(),
            };
            (stem, series)
        }
    };

    let fit = quadratic_fit(&series).map_err(usage)?;
    let comparison = request.reference.map(|r| compare_fit(&fit, r, request.tolerances()));
    let samples = series.samples();
    let report = FitReport {
        name: &stem,
        metric: series.metric,
        samples: samples.len(),
        t_first: samples[0].t,
        t_last: samples[samples.len() - 1].t,
        fit,
        comparison,
    };
    let json = to_json(&report);
    write(out, &format!("{stem}_fit.json"), &json)?;
    print!("{json}");

    match &report.comparison {
        Some(c) if !c.pass => {
            let failed: Vec<String> = c
                .coefficients
                .iter()
                .filter(|k| !k.pass)
                .map(|k| format!("{} = {} vs {} (rel {:.3e})", k.name, k.fitted, k.reference, k.rel_deviation))
                .collect();
            Err(CliError::Tolerance(failed.join(", ")))
        }
        _ => Ok(()),
    }
}

#[derive(Debug, Serialize)]
struct InvolutionCheck {
    generator: ComplexMatrix,
    max_deviation: f64,
}

#[derive(Debug, Serialize)]
struct DeriveReport {
    coin: String,
    dim: usize,
    description: String,
    matrix: ComplexMatrix,
    unitarity_residual: f64,
    hamiltonian: ComplexMatrix,
    hermiticity_residual: f64,
    /// `‖e^{−iH} − S‖_max`.
    round_trip_residual: f64,
    involution: Option<InvolutionCheck>,
}

pub fn derive(coin: &str) -> Result<(), CliError> {
    let spec = parse_coin(coin).map_err(usage)?;
    let h = spin_hamiltonian(&spec).map_err(runtime)?;
    let back = exp_minus_i_hermitian(&h, 1.0).map_err(runtime)?;
    let involution = involution_generator(&spec).map(|g| InvolutionCheck { max_deviation: g.max_abs_diff(&h), generator: g });
    let report = DeriveReport {
        coin: spec.name.clone(),
        dim: spec.dim,
        description: spec.reference.clone(),
        unitarity_residual: spec.matrix.unitarity_residual(),
        hermiticity_residual: h.hermiticity_residual(),
        round_trip_residual: back.max_abs_diff(&spec.matrix),
        matrix: spec.matrix,
        hamiltonian: h,
        involution,
    };
    print!("{}", to_json(&report));
    Ok(())
}

#[derive(Debug, Clone)]
pub struct OracleRequest {
    pub kind: LatticeKind,
    pub mode: Mode,
    pub coin: String,
    pub extent: i64,
    pub shift_sign: ShiftSign,
    pub steps: usize,
    pub probes: u64,
}

#[derive(Debug, Serialize)]
struct OracleOutput<'a> {
    lattice: LatticeKind,
    mode: Mode,
    coin: &'a str,
    extent: i64,
    shift_sign: ShiftSign,
    #[serde(flatten)]
    report: qwalk::engine::OracleReport,
    tolerance: f64,
    pass: bool,
}

pub fn oracle(req: &OracleRequest) -> Result<(), CliError> {
    let coin = parse_coin(&req.coin).map_err(usage)?;
    let lattice = LatticeDescriptor::new(req.kind, req.extent, Boundary::Periodic).map_err(usage)?;
    let convention = ChiralityConvention::new(req.shift_sign);
    let report = oracle_check(&lattice, req.mode, &coin, convention, req.steps, req.probes).map_err(|e| match e {
        EngineError::TooLarge { .. } => runtime(e),
        other => usage(other),
    })?;
    let pass = report.max_deviation <= ORACLE_TOL && report.unitarity_residual <= ORACLE_TOL;
    let deviation = report.max_deviation;
    let output = OracleOutput {
        lattice: req.kind,
        mode: req.mode,
        coin: &coin.name,
        extent: req.extent,
        shift_sign: req.shift_sign,
        report,
        tolerance: ORACLE_TOL,
        pass,
    };
    print!("{}", to_json(&output));
    if pass {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!("engine and dense operator differ by {deviation:e}")))
    }
}

pub fn list_coins(json: bool) -> Result<(), CliError> {
    let coins = registry();
    if json {
        print!("{}", to_json(&coins));
        return Ok(());
    }
    println!("{:<12} {:>3}  description", "name", "dim");
    for c in &coins {
        let name = if c.params.is_empty() { c.name.clone() } else { c.name.split('(').next().unwrap_or_default().to_string() + "(θ)" };
        println!("{name:<12} {:>3}  {}", c.dim, c.reference);
    }
    println!("{:<12} {:>3}  identity coin, d ∈ {{2, 3, 4, 6}}", "identity(d)", "d");
    Ok(())
}
