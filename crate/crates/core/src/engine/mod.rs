// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

//! Lattice walk engine: state storage, step kernels, a dense reference
//! operator and position distributions.

mod dense;
mod distribution;
mod lattice;
mod state;
mod step;

use thiserror::Error;

use crate::coins::CoinError;
use crate::matrix::MatrixError;

pub use dense::{
    dense_evolution_matrix, oracle_check, probe_vector, OracleReport, DENSE_LIMIT, DENSE_MAX_EXTENT,
};
pub use distribution::{graphene_euclidean, probability_distribution, Distribution, EuclideanKey};
pub use lattice::{
    Boundary, ChiralityConvention, LatticeDescriptor, LatticeKind, ShiftSign, Site,
};
pub use state::{initial_state, SiteAmplitudes, StateSnapshot, WalkState};
pub use step::{
    run, run_observed, step_graphene_additive, step_graphene_threestep, step_line,
    step_square_additive, step_square_twostep, Evolution, Mode, RunOutput,
};

/// Amplitudes at or below this magnitude may silently fall off a hard-fail edge.
pub const LEAK_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("site {site:?} lies outside the lattice")]
    OutOfBounds { site: Site },
    #[error("initial chirality vector has zero norm")]
    ZeroVector,
    #[error("chirality vector has length {got}, lattice needs {expected}")]
    ChiralityLength { expected: usize, got: usize },
    #[error("operation needs a {expected:?} lattice, state is on {got:?}")]
    WrongLattice { expected: LatticeKind, got: LatticeKind },
    #[error("coin has dimension {got}, expected {expected}")]
    CoinDimension { expected: usize, got: usize },
    #[error("mode {mode:?} is not defined on a {kind:?} lattice")]
    IncompatibleMode { kind: LatticeKind, mode: Mode },
    #[error("amplitude {magnitude:e} of component {component} at {site:?} would leave the lattice")]
    BoundaryHit { site: Site, component: usize, magnitude: f64 },
    #[error("dense operator of dimension {dim} exceeds the limit {limit}")]
    TooLarge { dim: usize, limit: usize },
    #[error("flat vector has length {got}, expected {expected}")]
    FlatLength { expected: usize, got: usize },
    #[error(transparent)]
    Coin(#[from] CoinError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}
