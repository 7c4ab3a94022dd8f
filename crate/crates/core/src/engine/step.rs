// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distribution::{probability_distribution, Distribution};
use super::lattice::{Boundary, ChiralityConvention, LatticeDescriptor, LatticeKind, Site};
use super::state::{Field, WalkState};
use super::{EngineError, LEAK_TOL};
use crate::coins::{compose_graphene_matrix, graphene_direction_ops, CoinSpec};
use crate::matrix::{ComplexMatrix, MatrixError, PRECONDITION_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Below this many sites in the active box the coin pass stays sequential.
const PARALLEL_MIN_SITES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// One coin, then every component shifts along its own axis.
    Additive,
    /// Square lattice: coin + x-shift of axis-1 components, then coin +
    /// y-shift of axis-2 components.
    TwoStep,
    /// Graphene: `W₃∘W₂∘W₁`, each `Wᵢ` flipping direction with `Mᵢ` and
    /// shifting every component along axis `i`.
    ThreeStep,
}

fn check_kind(state: &WalkState, expected: LatticeKind) -> Result<(), EngineError> {
    if state.lattice.kind != expected {
        return Err(EngineError::WrongLattice { expected, got: state.lattice.kind });
    }
    Ok(())
}

fn check_coin(coin: &ComplexMatrix, dim: usize) -> Result<(), EngineError> {
    if coin.dim() != dim {
        return Err(EngineError::CoinDimension { expected: dim, got: coin.dim() });
    }
    let residual = coin.unitarity_residual();
    if residual > PRECONDITION_TOL {
        return Err(MatrixError::NotUnitary { residual }.into());
    }
    Ok(())
}

pub fn step_line(state: &mut WalkState, coin: &ComplexMatrix) -> Result<(), EngineError> {
    check_kind(state, LatticeKind::Line)?;
    check_coin(coin, 2)?;
    dense_step(state, &[(coin, None)])
}

pub fn step_square_additive(state: &mut WalkState, coin4: &ComplexMatrix) -> Result<(), EngineError> {
    check_kind(state, LatticeKind::Square)?;
    check_coin(coin4, 4)?;
    dense_step(state, &[(coin4, None)])
}

pub fn step_square_twostep(state: &mut WalkState, coin4: &ComplexMatrix) -> Result<(), EngineError> {
    check_kind(state, LatticeKind::Square)?;
    check_coin(coin4, 4)?;
    dense_step(state, &[(coin4, Some(0)), (coin4, Some(1))])
}

pub fn step_graphene_additive(state: &mut WalkState, coin6: &ComplexMatrix) -> Result<(), EngineError> {
    check_kind(state, LatticeKind::Graphene)?;
    check_coin(coin6, 6)?;
    let conv = state.convention;
    let Field::Sparse(map) = &state.field else { unreachable!("graphene state is sparse") };
    let next = sparse_substep(map, &state.lattice, |amps| mul6(coin6, amps), |c| conv.displacement(c))?;
    state.field = Field::Sparse(next);
    state.step_count += 1;
    Ok(())
}

/// The axis coin `s3` is validated but does not enter the dynamics: each
/// sub-step acts only on the direction pair of every axis block.
pub fn step_graphene_threestep(state: &mut WalkState, s3: &CoinSpec) -> Result<(), EngineError> {
    check_kind(state, LatticeKind::Graphene)?;
    check_coin(&s3.matrix, 3)?;
    let conv = state.convention;
    let ops = graphene_direction_ops();
    let Field::Sparse(map) = &state.field else { unreachable!("graphene state is sparse") };
    let mut current = map.clone();
    for axis in 0..3 {
        let m = ops.get(axis);
        current = sparse_substep(
            &current,
            &state.lattice,
            |amps| {
                let mut out = [ZERO; 6];
                for block in 0..3 {
                    let (u, v) = (amps[2 * block], amps[2 * block + 1]);
                    out[2 * block] = m[(0, 0)] * u + m[(0, 1)] * v;
                    out[2 * block + 1] = m[(1, 0)] * u + m[(1, 1)] * v;
                }
                out
            },
            |c| conv.displacement(2 * axis + c % 2),
        )?;
    }
    state.field = Field::Sparse(current);
    state.step_count += 1;
    Ok(())
}

fn mul6(m: &ComplexMatrix, v: &[Complex64; 6]) -> [Complex64; 6] {
    let mut out = [ZERO; 6];
    for (i, o) in out.iter_mut().enumerate() {
        *o = m.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

/// One local operator at every site followed by a shift; `route` gives the
/// `(axis, delta)` of each output component. Builds a fresh map so the input
/// is untouched on error.
fn sparse_substep(
    map: &BTreeMap<Site, [Complex64; 6]>,
    lattice: &LatticeDescriptor,
    local: impl Fn(&[Complex64; 6]) -> [Complex64; 6],
    route: impl Fn(usize) -> (usize, i64),
) -> Result<BTreeMap<Site, [Complex64; 6]>, EngineError> {
    let periodic = lattice.boundary == Boundary::Periodic;
    let mut next: BTreeMap<Site, [Complex64; 6]> = BTreeMap::new();
    for (site, amps) in map {
        let out = local(amps);
        for (c, &z) in out.iter().enumerate() {
            if z == ZERO {
                continue;
            }
            let (axis, delta) = route(c);
            let mut target = *site;
            target[axis] += delta;
            if periodic {
                target[axis] = lattice.wrap(target[axis]);
            } else if !lattice.contains(&target) {
                if z.norm() > LEAK_TOL {
                    return Err(EngineError::BoundaryHit { site: *site, component: c, magnitude: z.norm() });
                }
                continue;
            }
            next.entry(target).or_insert([ZERO; 6])[c] += z;
        }
    }
    Ok(next)
}

/// Runs the listed `(coin, moving axis)` sub-steps on a dense field as one
/// time step. `None` moves every component along its own axis. The field is
/// restored if any sub-step hits the edge.
fn dense_step(state: &mut WalkState, substeps: &[(&ComplexMatrix, Option<usize>)]) -> Result<(), EngineError> {
    let lattice = state.lattice;
    let conv = state.convention;
    let Field::Dense { data, reach } = &mut state.field else { unreachable!("line and square states are dense") };
    let hard = lattice.boundary == Boundary::HardFail;
    let margin = lattice.hi().min(-lattice.lo());
    let backup = (hard && *reach + substeps.len() as i64 > margin).then(|| (data.clone(), *reach));
    for &(coin, axis) in substeps {
        if let Err(e) = dense_substep(&lattice, conv, data, reach, coin, axis) {
            if let Some((d, r)) = backup {
                *data = d;
                *reach = r;
            }
            return Err(e);
        }
    }
    state.step_count += 1;
    Ok(())
}

fn dense_substep(
    lattice: &LatticeDescriptor,
    conv: ChiralityConvention,
    data: &mut [Complex64],
    reach: &mut i64,
    coin: &ComplexMatrix,
    moving_axis: Option<usize>,
) -> Result<(), EngineError> {
    let (lo, hi) = (lattice.lo(), lattice.hi());
    let periodic = lattice.boundary == Boundary::Periodic;
    let (blo, bhi) = if periodic { (lo, hi) } else { ((-*reach).max(lo), (*reach).min(hi)) };
    let axes = lattice.kind.axes();
    let cdim = lattice.kind.chirality_dim();
    let side = lattice.side();

    let row_len = side.pow(axes as u32 - 1) * cdim;
    let coin_row = |ix: usize, row: &mut [Complex64]| {
        let x = ix as i64 + lo;
        if x < blo || x > bhi {
            return;
        }
        if axes == 1 {
            apply_coin(coin, row);
        } else {
            for y in blo..=bhi {
                let off = (y - lo) as usize * cdim;
                apply_coin(coin, &mut row[off..off + cdim]);
            }
        }
    };
    let box_sites = ((bhi - blo + 1) as usize).pow(axes as u32);
    if axes > 1 && box_sites >= PARALLEL_MIN_SITES {
        data.par_chunks_mut(row_len).enumerate().for_each(|(ix, row)| coin_row(ix, row));
    } else {
        data.chunks_mut(row_len).enumerate().for_each(|(ix, row)| coin_row(ix, row));
    }

    for c in 0..cdim {
        let (axis, delta) = conv.displacement(c);
        if moving_axis.is_some_and(|a| a != axis) {
            continue;
        }
        let index = |pos: i64, other: i64| -> usize {
            let (p, o) = ((pos - lo) as usize, (other - lo) as usize);
            let site = match (axes, axis) {
                (1, _) => p,
                (_, 0) => p * side + o,
                _ => o * side + p,
            };
            site * cdim + c
        };
        let others = if axes == 1 { 0..=0 } else { blo..=bhi };
        // x is the slow index, so visit y innermost when shifting along x.
        let pos_outer = axis == 0;
        shift_component(data, (lo, hi), (blo, bhi), others, delta, periodic, pos_outer, index).map_err(
            |(p, other, magnitude)| {
                let mut site = [0; 3];
                site[axis] = p;
                if axes > 1 {
                    site[1 - axis] = other;
                }
                EngineError::BoundaryHit { site, component: c, magnitude }
            },
        )?;
    }
    *reach = if periodic { lattice.extent() } else { (*reach + 1).min(lattice.extent()) };
    Ok(())
}

fn apply_coin(coin: &ComplexMatrix, slot: &mut [Complex64]) {
    if slot.iter().all(|z| *z == ZERO) {
        return;
    }
    let mut out = [ZERO; 6];
    for (i, o) in out.iter_mut().enumerate().take(slot.len()) {
        *o = coin.row(i).iter().zip(slot.iter()).map(|(a, b)| a * b).sum();
    }
    slot.copy_from_slice(&out[..slot.len()]);
}

/// `new[p] = old[p − delta]` along one axis, for every line `other`.
/// Without wrap-around the support along the axis is `support`, and a value
/// above [`LEAK_TOL`] about to leave `span` is reported as
/// `(position, other, magnitude)` before anything is written.
#[allow(clippy::too_many_arguments)]
fn shift_component(
    data: &mut [Complex64],
    span: (i64, i64),
    support: (i64, i64),
    others: RangeInclusive<i64>,
    delta: i64,
    periodic: bool,
    pos_outer: bool,
    index: impl Fn(i64, i64) -> usize,
) -> Result<(), (i64, i64, f64)> {
    let (lo, hi) = span;
    let (slo, shi, tlo, thi) = if periodic {
        (lo, hi, lo, hi)
    } else {
        let (blo, bhi) = support;
        let leaving = if delta < 0 { blo } else { bhi };
        if !(lo..=hi).contains(&(leaving + delta)) {
            for o in others.clone() {
                let mag = data[index(leaving, o)].norm();
                if mag > LEAK_TOL {
                    return Err((leaving, o, mag));
                }
            }
        }
        (blo, bhi, (blo + delta).max(lo).min(blo), (bhi + delta).min(hi).max(bhi))
    };
    // Values wrapping around re-enter at the far end.
    let (exit, entry) = if delta < 0 { (lo, hi) } else { (hi, lo) };
    let wrapped: Vec<Complex64> =
        if periodic { others.clone().map(|o| data[index(exit, o)]).collect() } else { Vec::new() };

    // Ascending for leftward moves, descending for rightward, so every source
    // is read before it is overwritten.
    let positions: Vec<i64> = if delta < 0 { (tlo..=thi).collect() } else { (tlo..=thi).rev().collect() };
    let mut write = |p: i64, o: i64| {
        let s = p - delta;
        data[index(p, o)] = if (slo..=shi).contains(&s) { data[index(s, o)] } else { ZERO };
    };
    if pos_outer {
        for &p in &positions {
            others.clone().for_each(|o| write(p, o));
        }
    } else {
        for o in others.clone() {
            positions.iter().for_each(|&p| write(p, o));
        }
    }
    for (o, v) in others.zip(wrapped) {
        data[index(entry, o)] = v;
    }
    Ok(())
}

/// A lattice kind, a mode and a coin, resolved into the operator the step
/// kernels apply.
#[derive(Debug, Clone)]
pub struct Evolution {
    kind: LatticeKind,
    mode: Mode,
    coin: CoinSpec,
    operator: ComplexMatrix,
}

impl Evolution {
    /// Graphene additive mode accepts either a 3×3 axis coin, composed into
    /// the 6×6 walk coin, or a ready 6×6 coin.
    pub fn new(kind: LatticeKind, mode: Mode, coin: CoinSpec) -> Result<Self, EngineError> {
        let operator = match (kind, mode) {
            (LatticeKind::Line, Mode::Additive) => {
                check_coin(&coin.matrix, 2)?;
                coin.matrix.clone()
            }
            (LatticeKind::Square, Mode::Additive | Mode::TwoStep) => {
                check_coin(&coin.matrix, 4)?;
                coin.matrix.clone()
            }
            (LatticeKind::Graphene, Mode::Additive) if coin.dim == 6 => {
                check_coin(&coin.matrix, 6)?;
                coin.matrix.clone()
            }
            (LatticeKind::Graphene, Mode::Additive) => {
                check_coin(&coin.matrix, 3)?;
                compose_graphene_matrix(&coin.matrix)?
            }
            (LatticeKind::Graphene, Mode::ThreeStep) => {
                check_coin(&coin.matrix, 3)?;
                coin.matrix.clone()
            }
            _ => return Err(EngineError::IncompatibleMode { kind, mode }),
        };
        Ok(Self { kind, mode, coin, operator })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn coin(&self) -> &CoinSpec {
        &self.coin
    }

    /// Matrix applied at each site: the coin itself, or the composed 6×6
    /// coin for graphene additive mode.
    pub fn operator(&self) -> &ComplexMatrix {
        &self.operator
    }

    pub fn step(&self, state: &mut WalkState) -> Result<(), EngineError> {
        match (self.kind, self.mode) {
            (LatticeKind::Line, _) => step_line(state, &self.operator),
            (LatticeKind::Square, Mode::Additive) => step_square_additive(state, &self.operator),
            (LatticeKind::Square, _) => step_square_twostep(state, &self.operator),
            (LatticeKind::Graphene, Mode::Additive) => step_graphene_additive(state, &self.operator),
            (LatticeKind::Graphene, _) => step_graphene_threestep(state, &self.coin),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// `(step_count, distribution)` pairs in increasing step order.
    pub records: Vec<(usize, Distribution)>,
    pub final_state: WalkState,
}

/// Steps `state` `steps` times, calling `observer` on the initial state and
/// after every step.
pub fn run_observed(
    state: &mut WalkState,
    evolution: &Evolution,
    steps: usize,
    mut observer: impl FnMut(&WalkState),
) -> Result<(), EngineError> {
    observer(state);
    for _ in 0..steps {
        evolution.step(state)?;
        observer(state);
    }
    Ok(())
}

/// Records the distribution at step 0, at every multiple of `record_every`
/// and at the last step. `record_every = 0` records only the two ends.
pub fn run(
    mut state: WalkState,
    evolution: &Evolution,
    steps: usize,
    record_every: usize,
) -> Result<RunOutput, EngineError> {
    let start = state.step_count;
    let mut records = Vec::new();
    run_observed(&mut state, evolution, steps, |s| {
        let t = s.step_count - start;
        let due = t == 0 || t == steps || (record_every > 0 && t.is_multiple_of(record_every));
        if due {
            records.push((s.step_count, probability_distribution(s)));
        }
    })?;
    Ok(RunOutput { records, final_state: state })
}
