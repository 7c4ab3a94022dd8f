// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

//! Position moments, variance-vs-time series and quadratic fits.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{
    graphene_euclidean, probability_distribution, run_observed, Distribution, EngineError, Evolution,
    LatticeKind, Site, WalkState,
};

/// Distributions must sum to one within this before moments are taken.
pub const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("distribution is empty")]
    EmptyDistribution,
    #[error("distribution sums to {total}, not 1")]
    NotNormalized { total: f64 },
    #[error("sample times must increase strictly: {previous} then {next}")]
    NonIncreasingTime { previous: usize, next: usize },
    #[error("variance {variance} at t = {t} is negative")]
    NegativeVariance { t: usize, variance: f64 },
    #[error("a quadratic fit needs at least 4 samples, got {0}")]
    InsufficientSamples(usize),
    #[error("normal equations are singular")]
    SingularSystem,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Position coordinates used for moments. Line and square lattices use site
/// indices under either metric; graphene uses `(n₁, n₂, n₃)` for `Index` and
/// planar `(x, y)` for `Euclidean`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Index,
    #[default]
    Euclidean,
}

impl Metric {
    pub fn coordinates(self, kind: LatticeKind, site: &Site) -> Vec<f64> {
        match (kind, self) {
            (LatticeKind::Line, _) => vec![site[0] as f64],
            (LatticeKind::Square, _) => vec![site[0] as f64, site[1] as f64],
            (LatticeKind::Graphene, Metric::Index) => site.iter().map(|&n| n as f64).collect(),
            (LatticeKind::Graphene, Metric::Euclidean) => {
                let (x, y) = graphene_euclidean(site);
                vec![x, y]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Moments {
    pub mean: Vec<f64>,
    /// Per-axis variance, `tr Σ / d` for `d` coordinates. Equals the plain
    /// variance on a line.
    pub variance: f64,
    /// `E‖r‖² − ‖E r‖²`.
    pub covariance_trace: f64,
}

pub fn position_moments(dist: &Distribution, metric: Metric) -> Result<Moments, AnalysisError> {
    if dist.is_empty() {
        return Err(AnalysisError::EmptyDistribution);
    }
    let total = dist.total();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(AnalysisError::NotNormalized { total });
    }
    let points: Vec<(Vec<f64>, f64)> = dist
        .probabilities()
        .iter()
        .map(|(site, &p)| (metric.coordinates(dist.kind(), site), p))
        .collect();
    let d = points[0].0.len();
    let mut mean = vec![0.0; d];
    for (r, p) in &points {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += p * x;
        }
    }
    // Centered second pass: exact zero for point masses, stable under translation.
    let covariance_trace: f64 = points
        .iter()
        .map(|(r, p)| p * r.iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).sum::<f64>())
        .sum();
    Ok(Moments { mean, variance: covariance_trace / d as f64, covariance_trace })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceSample {
    pub t: usize,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceSeries {
    pub metric: Metric,
    samples: Vec<VarianceSample>,
}

impl VarianceSeries {
    pub fn new(metric: Metric) -> Self {
        Self { metric, samples: Vec::new() }
    }

    pub fn from_samples(metric: Metric, samples: &[(usize, f64)]) -> Result<Self, AnalysisError> {
        let mut s = Self::new(metric);
        for &(t, v) in samples {
            s.push(t, v)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, t: usize, variance: f64) -> Result<(), AnalysisError> {
        if let Some(last) = self.samples.last() {
            if t <= last.t {
                return Err(AnalysisError::NonIncreasingTime { previous: last.t, next: t });
            }
        }
        if variance.is_nan() || variance < 0.0 {
            return Err(AnalysisError::NegativeVariance { t, variance });
        }
        self.samples.push(VarianceSample { t, variance });
        Ok(())
    }

    pub fn samples(&self) -> &[VarianceSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,variance\n");
        for v in &self.samples {
            let _ = writeln!(s, "{},{:?}", v.t, v.variance);
        }
        s
    }
}

/// Runs `evolution` for `steps` steps and samples the variance at every
/// positive multiple of `stride`, plus the last step.
pub fn variance_series(
    mut state: WalkState,
    evolution: &Evolution,
    steps: usize,
    stride: usize,
    metric: Metric,
) -> Result<VarianceSeries, AnalysisError> {
    let stride = stride.max(1);
    let start = state.step_count();
    let mut series = VarianceSeries::new(metric);
    let mut failure = None;
    run_observed(&mut state, evolution, steps, |s| {
        let t = s.step_count() - start;
        if failure.is_some() || t == 0 || (!t.is_multiple_of(stride) && t != steps) {
            return;
        }
        let result = position_moments(&probability_distribution(s), metric)
            .and_then(|m| series.push(s.step_count(), m.variance));
        if let Err(e) = result {
            failure = Some(e);
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(series),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticFit {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub rms_residual: f64,
    pub r_squared: f64,
}

impl QuadraticFit {
    pub fn coefficients(&self) -> [f64; 3] {
        [self.c0, self.c1, self.c2]
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.c0 + t * (self.c1 + t * self.c2)
    }
}

/// Least squares on `(1, t, t²)`. The basis is built in the centred, scaled
/// variable `u = (t − t̄)/s` and orthogonalized by modified Gram–Schmidt, then
/// mapped back to powers of `t`.
pub fn quadratic_fit(series: &VarianceSeries) -> Result<QuadraticFit, AnalysisError> {
    let n = series.len();
    if n < 4 {
        return Err(AnalysisError::InsufficientSamples(n));
    }
    let ts: Vec<f64> = series.samples().iter().map(|s| s.t as f64).collect();
    let vs: Vec<f64> = series.samples().iter().map(|s| s.variance).collect();
    let m = ts.iter().sum::<f64>() / n as f64;
    let scale = ts.iter().map(|t| (t - m).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(AnalysisError::SingularSystem);
    }
    let u: Vec<f64> = ts.iter().map(|t| (t - m) / scale).collect();

    // Columns 1, u, u²; thin QR with R upper triangular.
    let mut q: Vec<Vec<f64>> = vec![vec![1.0; n], u.clone(), u.iter().map(|x| x * x).collect()];
    let mut r = [[0.0f64; 3]; 3];
    for j in 0..3 {
        for i in 0..j {
            let dot: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[i][j] = dot;
            let qi = q[i].clone();
            for (x, y) in q[j].iter_mut().zip(&qi) {
                *x -= dot * y;
            }
        }
        let norm = q[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-12 * (n as f64).sqrt() {
            return Err(AnalysisError::SingularSystem);
        }
        r[j][j] = norm;
        q[j].iter_mut().for_each(|x| *x /= norm);
    }
    let qtv: Vec<f64> = q.iter().map(|col| col.iter().zip(&vs).map(|(a, b)| a * b).sum()).collect();
    let mut b = [0.0f64; 3];
    for i in (0..3).rev() {
        let tail: f64 = (i + 1..3).map(|k| r[i][k] * b[k]).sum();
        b[i] = (qtv[i] - tail) / r[i][i];
    }

    let (a0, a1, a2) = (b[0], b[1] / scale, b[2] / (scale * scale));
    let c2 = a2;
    let c1 = a1 - 2.0 * a2 * m;
    let c0 = a0 - a1 * m + a2 * m * m;

    // Residuals in the well-conditioned basis.
    let fitted = |x: f64| b[0] + x * (b[1] + x * b[2]);
    let ss_res: f64 = u.iter().zip(&vs).map(|(x, v)| (v - fitted(*x)).powi(2)).sum();
    let mean_v = vs.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = vs.iter().map(|v| (v - mean_v).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    Ok(QuadraticFit { c0, c1, c2, rms_residual: (ss_res / n as f64).sqrt(), r_squared })
}

/// Acceptance band for one coefficient. A deviation passes if it is within
/// either bound; a coefficient with neither bound is reported but not gated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: Option<f64>,
    pub abs: Option<f64>,
}

impl Tolerance {
    pub fn rel(r: f64) -> Self {
        Self { rel: Some(r), abs: None }
    }

    pub fn abs(a: f64) -> Self {
        Self { rel: None, abs: Some(a) }
    }

    pub fn is_set(&self) -> bool {
        self.rel.is_some() || self.abs.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientCheck {
    pub name: &'static str,
    pub fitted: f64,
    pub reference: f64,
    pub abs_deviation: f64,
    /// `|fitted − reference| / |reference|`; infinite for a zero reference
    /// unless the fit is exact.
    pub rel_deviation: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitComparison {
    pub coefficients: Vec<CoefficientCheck>,
    pub pass: bool,
}

pub fn compare_fit(fit: &QuadraticFit, reference: [f64; 3], tolerances: [Tolerance; 3]) -> FitComparison {
    let coefficients: Vec<CoefficientCheck> = ["c0", "c1", "c2"]
        .into_iter()
        .zip(fit.coefficients())
        .zip(reference)
        .zip(tolerances)
        .map(|(((name, fitted), reference), tolerance)| {
            let abs_deviation = (fitted - reference).abs();
            let rel_deviation = if reference != 0.0 {
                abs_deviation / reference.abs()
            } else if abs_deviation == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            let pass = !tolerance.is_set()
                || tolerance.rel.is_some_and(|r| rel_deviation <= r)
                || tolerance.abs.is_some_and(|a| abs_deviation <= a);
            CoefficientCheck { name, fitted, reference, abs_deviation, rel_deviation, tolerance, pass }
        })
        .collect();
    let pass = coefficients.iter().all(|c| c.pass);
    FitComparison { coefficients, pass }
}
