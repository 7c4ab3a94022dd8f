// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

//! Explicit walk operator `𝕎 = Σₙ T(n)(C ⊗ |n⟩⟨n|)` on a small periodic
//! lattice, assembled entry by entry. It shares no code with the step
//! kernels and serves as their reference.

use num_complex::Complex64;
use serde::Serialize;

use super::lattice::{Boundary, ChiralityConvention, LatticeDescriptor, LatticeKind};
use super::state::WalkState;
use super::step::{Evolution, Mode};
use super::EngineError;
use crate::coins::{compose_graphene_matrix, graphene_direction_ops, CoinSpec};
use crate::matrix::ComplexMatrix;

/// Largest dense operator dimension.
pub const DENSE_LIMIT: usize = 5000;
/// Largest lattice extent accepted.
pub const DENSE_MAX_EXTENT: i64 = 6;

/// One-step operator in the flat ordering of [`super::WalkState::to_flat`].
pub fn dense_evolution_matrix(
    lattice: &LatticeDescriptor,
    mode: Mode,
    coin: &CoinSpec,
    convention: ChiralityConvention,
) -> Result<ComplexMatrix, EngineError> {
    if lattice.boundary != Boundary::Periodic {
        return Err(EngineError::InvalidLattice("the dense operator needs a periodic lattice".into()));
    }
    if lattice.extent() > DENSE_MAX_EXTENT {
        return Err(EngineError::InvalidLattice(format!(
            "extent {} exceeds {DENSE_MAX_EXTENT}",
            lattice.extent()
        )));
    }
    let dim = lattice.site_count() * lattice.kind.chirality_dim();
    if dim > DENSE_LIMIT {
        return Err(EngineError::TooLarge { dim, limit: DENSE_LIMIT });
    }
    let own_axis = |c: usize| Some(convention.displacement(c));
    let expect_dim = |d: usize| {
        if coin.dim == d {
            Ok(())
        } else {
            Err(EngineError::CoinDimension { expected: d, got: coin.dim })
        }
    };

    match (lattice.kind, mode) {
        (LatticeKind::Line, Mode::Additive) => {
            expect_dim(2)?;
            Ok(conditional_walk(lattice, &coin.matrix, own_axis))
        }
        (LatticeKind::Square, Mode::Additive) => {
            expect_dim(4)?;
            Ok(conditional_walk(lattice, &coin.matrix, own_axis))
        }
        (LatticeKind::Square, Mode::TwoStep) => {
            expect_dim(4)?;
            let only = |axis: usize| {
                move |c: usize| {
                    let (a, d) = convention.displacement(c);
                    (a == axis).then_some((a, d))
                }
            };
            let wx = conditional_walk(lattice, &coin.matrix, only(0));
            let wy = conditional_walk(lattice, &coin.matrix, only(1));
            Ok(wy.mul(&wx)?)
        }
        (LatticeKind::Graphene, Mode::Additive) => {
            let coin6 = match coin.dim {
                6 => coin.matrix.clone(),
                _ => compose_graphene_matrix(&coin.matrix)?,
            };
            Ok(conditional_walk(lattice, &coin6, own_axis))
        }
        (LatticeKind::Graphene, Mode::ThreeStep) => {
            expect_dim(3)?;
            let ops = graphene_direction_ops();
            let mut total = ComplexMatrix::identity(dim);
            for axis in 0..3 {
                let local = ComplexMatrix::identity(3).kron(ops.get(axis));
                let w = conditional_walk(lattice, &local, |c| {
                    let (_, d) = convention.displacement(c);
                    Some((axis, d))
                });
                total = w.mul(&total)?;
            }
            Ok(total)
        }
        (kind, mode) => Err(EngineError::IncompatibleMode { kind, mode }),
    }
}

/// `Σₙ Σ_{c,c'} local[c][c'] |n + route(c), c⟩⟨n, c'|`; `route(c) = None`
/// leaves component `c` in place.
fn conditional_walk(
    lattice: &LatticeDescriptor,
    local: &ComplexMatrix,
    route: impl Fn(usize) -> Option<(usize, i64)>,
) -> ComplexMatrix {
    let cdim = local.dim();
    let sites = lattice.site_count();
    let mut w = ComplexMatrix::zeros(sites * cdim);
    for s in 0..sites {
        let n = lattice.site_at(s);
        for c_out in 0..cdim {
            let mut target = n;
            if let Some((axis, delta)) = route(c_out) {
                target[axis] = lattice.wrap(target[axis] + delta);
            }
            let row = lattice.site_index(&target) * cdim + c_out;
            for c_in in 0..cdim {
                let entry: Complex64 = local[(c_out, c_in)];
                w[(row, s * cdim + c_in)] += entry;
            }
        }
    }
    w
}

/// Deterministic, normalized, fully populated test vector. Different seeds
/// give linearly independent vectors in practice.
pub fn probe_vector(dim: usize, seed: u64) -> Vec<Complex64> {
    let s = seed as f64 + 1.0;
    let raw: Vec<Complex64> = (0..dim)
        .map(|j| {
            let j = j as f64 + 1.0;
            Complex64::new((0.618_034 * j * s + 0.3 * s).sin(), (1.324_718 * j / s + 0.7).cos())
        })
        .collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    raw.into_iter().map(|z| z / norm).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub dimension: usize,
    pub unitarity_residual: f64,
    pub steps: usize,
    pub probes: usize,
    /// Largest `|engine − dense|` over all probes, steps and entries.
    pub max_deviation: f64,
}

/// Steps `probes` probe vectors `steps` times with both the engine and the
/// dense operator and reports the largest entrywise difference.
pub fn oracle_check(
    lattice: &LatticeDescriptor,
    mode: Mode,
    coin: &CoinSpec,
    convention: ChiralityConvention,
    steps: usize,
    probes: u64,
) -> Result<OracleReport, EngineError> {
    let w = dense_evolution_matrix(lattice, mode, coin, convention)?;
    let evolution = Evolution::new(lattice.kind, mode, coin.clone())?;
    let mut max_deviation: f64 = 0.0;
    for seed in 0..probes {
        let mut v = probe_vector(w.dim(), seed);
        let mut state = WalkState::from_flat(*lattice, &v)?.with_convention(convention);
        for _ in 0..steps {
            v = w.apply(&v)?;
            evolution.step(&mut state)?;
            let dev = state.to_flat().iter().zip(&v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            max_deviation = max_deviation.max(dev);
        }
    }
    Ok(OracleReport {
        dimension: w.dim(),
        unitarity_residual: w.unitarity_residual(),
        steps,
        probes: probes as usize,
        max_deviation,
    })
}
