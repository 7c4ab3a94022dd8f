// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::lattice::{Boundary, ChiralityConvention, LatticeDescriptor, LatticeKind, Site};
use super::EngineError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Amplitude storage. Line and square lattices use a dense array over the
/// whole lattice; graphene uses a sparse map because the reachable triples are
/// a thin slab of the bounding cube.
#[derive(Debug, Clone)]
pub(super) enum Field {
    Dense {
        /// Index `site_index · chirality_dim + component`.
        data: Vec<Complex64>,
        /// All amplitudes satisfy `|coordinate| ≤ reach` on every axis.
        reach: i64,
    },
    Sparse(BTreeMap<Site, [Complex64; 6]>),
}

#[derive(Debug, Clone)]
pub struct WalkState {
    pub(super) lattice: LatticeDescriptor,
    pub(super) convention: ChiralityConvention,
    pub(super) step_count: usize,
    pub(super) field: Field,
}

/// Point-source state: `chi` (renormalized) at `site`, zero elsewhere.
pub fn initial_state(
    lattice: LatticeDescriptor,
    chi: &[Complex64],
    site: Site,
) -> Result<WalkState, EngineError> {
    let cdim = lattice.kind.chirality_dim();
    if chi.len() != cdim {
        return Err(EngineError::ChiralityLength { expected: cdim, got: chi.len() });
    }
    if !lattice.contains(&site) {
        return Err(EngineError::OutOfBounds { site });
    }
    let norm = chi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !norm.is_finite() || norm <= 0.0 {
        return Err(EngineError::ZeroVector);
    }
    let chi: Vec<Complex64> = chi.iter().map(|z| z / norm).collect();

    let field = match lattice.kind {
        LatticeKind::Graphene => {
            let mut amps = [ZERO; 6];
            amps.copy_from_slice(&chi);
            Field::Sparse(BTreeMap::from([(site, amps)]))
        }
        _ => {
            let mut data = vec![ZERO; lattice.site_count() * cdim];
            let base = lattice.site_index(&site) * cdim;
            data[base..base + cdim].copy_from_slice(&chi);
            let reach = site.iter().map(|n| n.abs()).max().unwrap_or(0);
            Field::Dense { data, reach }
        }
    };
    Ok(WalkState { lattice, convention: ChiralityConvention::default(), step_count: 0, field })
}

impl WalkState {
    pub fn with_convention(mut self, convention: ChiralityConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn lattice(&self) -> &LatticeDescriptor {
        &self.lattice
    }

    pub fn convention(&self) -> ChiralityConvention {
        self.convention
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn chirality_dim(&self) -> usize {
        self.lattice.kind.chirality_dim()
    }

    pub fn amplitude(&self, site: &Site, component: usize) -> Complex64 {
        if component >= self.chirality_dim() || !self.lattice.contains(site) {
            return ZERO;
        }
        match &self.field {
            Field::Dense { data, .. } => {
                data[self.lattice.site_index(site) * self.chirality_dim() + component]
            }
            Field::Sparse(map) => map.get(site).map_or(ZERO, |a| a[component]),
        }
    }

    /// Sites carrying any nonzero amplitude, in ascending site order.
    pub fn site_amplitudes(&self) -> Vec<(Site, Vec<Complex64>)> {
        let cdim = self.chirality_dim();
        match &self.field {
            Field::Dense { data, .. } => data
                .chunks_exact(cdim)
                .enumerate()
                .filter(|(_, slot)| slot.iter().any(|z| *z != ZERO))
                .map(|(i, slot)| (self.lattice.site_at(i), slot.to_vec()))
                .collect(),
            Field::Sparse(map) => map
                .iter()
                .filter(|(_, a)| a.iter().any(|z| *z != ZERO))
                .map(|(s, a)| (*s, a.to_vec()))
                .collect(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        match &self.field {
            Field::Dense { data, .. } => data.iter().map(|z| z.norm_sqr()).sum(),
            Field::Sparse(map) => map.values().flatten().map(|z| z.norm_sqr()).sum(),
        }
    }

    /// State vector in the canonical ordering `site_index · chirality_dim + component`.
    pub fn to_flat(&self) -> Vec<Complex64> {
        match &self.field {
            Field::Dense { data, .. } => data.clone(),
            Field::Sparse(map) => {
                let cdim = self.chirality_dim();
                let mut flat = vec![ZERO; self.lattice.site_count() * cdim];
                for (site, amps) in map {
                    let base = self.lattice.site_index(site) * cdim;
                    flat[base..base + cdim].copy_from_slice(amps);
                }
                flat
            }
        }
    }

    /// Inverse of [`WalkState::to_flat`]. The vector is taken as is, without
    /// renormalization.
    pub fn from_flat(lattice: LatticeDescriptor, flat: &[Complex64]) -> Result<Self, EngineError> {
        let cdim = lattice.kind.chirality_dim();
        let expected = lattice.site_count() * cdim;
        if flat.len() != expected {
            return Err(EngineError::FlatLength { expected, got: flat.len() });
        }
        let field = match lattice.kind {
            LatticeKind::Graphene => {
                let mut map = BTreeMap::new();
                for (i, slot) in flat.chunks_exact(cdim).enumerate() {
                    if slot.iter().any(|z| *z != ZERO) {
                        let mut amps = [ZERO; 6];
                        amps.copy_from_slice(slot);
                        map.insert(lattice.site_at(i), amps);
                    }
                }
                Field::Sparse(map)
            }
            _ => {
                let reach = flat
                    .chunks_exact(cdim)
                    .enumerate()
                    .filter(|(_, slot)| slot.iter().any(|z| *z != ZERO))
                    .map(|(i, _)| lattice.site_at(i).iter().map(|n| n.abs()).max().unwrap_or(0))
                    .max()
                    .unwrap_or(0);
                let reach = if lattice.boundary == Boundary::Periodic { lattice.extent() } else { reach };
                Field::Dense { data: flat.to_vec(), reach }
            }
        };
        Ok(WalkState { lattice, convention: ChiralityConvention::default(), step_count: 0, field })
    }

    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            lattice: self.lattice,
            convention: self.convention,
            step_count: self.step_count,
            chirality_dim: self.chirality_dim(),
            sites: self
                .site_amplitudes()
                .into_iter()
                .map(|(site, amps)| SiteAmplitudes {
                    site: site[..self.lattice.kind.axes()].to_vec(),
                    amplitudes: amps.iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
        }
    }
}

/// JSON-friendly copy of a state; complex numbers are `[re, im]`.
#[derive(Debug, Clone, Serialize)]
pub struct StateSnapshot {
    pub lattice: LatticeDescriptor,
    pub convention: ChiralityConvention,
    pub step_count: usize,
    pub chirality_dim: usize,
    pub sites: Vec<SiteAmplitudes>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SiteAmplitudes {
    pub site: Vec<i64>,
    pub amplitudes: Vec<[f64; 2]>,
}
