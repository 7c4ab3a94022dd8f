// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::EngineError;

/// Site index tuple. Unused trailing axes are zero: a line site is `[x, 0, 0]`,
/// a square site `[x, y, 0]`, a graphene site `[n1, n2, n3]`.
pub type Site = [i64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeKind {
    Line,
    Square,
    Graphene,
}

impl LatticeKind {
    pub fn axes(self) -> usize {
        match self {
            LatticeKind::Line => 1,
            LatticeKind::Square => 2,
            LatticeKind::Graphene => 3,
        }
    }

    /// Two directions per axis.
    pub fn chirality_dim(self) -> usize {
        2 * self.axes()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    HardFail,
    Periodic,
}

/// Geometry of a bounded lattice. Every axis runs over `lo..=hi`; lattices
/// built with [`LatticeDescriptor::new`] are symmetric, `−extent..=extent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeDescriptor {
    pub kind: LatticeKind,
    lo: i64,
    hi: i64,
    pub boundary: Boundary,
}

impl LatticeDescriptor {
    pub fn new(kind: LatticeKind, extent: i64, boundary: Boundary) -> Result<Self, EngineError> {
        if extent < 1 {
            return Err(EngineError::InvalidLattice(format!("extent must be ≥ 1, got {extent}")));
        }
        Ok(Self { kind, lo: -extent, hi: extent, boundary })
    }

    /// Periodic lattice with `sites` sites per axis, indexed
    /// `−⌊sites/2⌋..` so that even ring sizes are possible.
    pub fn ring(kind: LatticeKind, sites: usize) -> Result<Self, EngineError> {
        if sites < 2 {
            return Err(EngineError::InvalidLattice(format!("a ring needs ≥ 2 sites, got {sites}")));
        }
        let lo = -((sites / 2) as i64);
        Ok(Self { kind, lo, hi: lo + sites as i64 - 1, boundary: Boundary::Periodic })
    }

    /// Hard-fail lattice just large enough that a walk of `steps` steps from
    /// the origin never reaches the edge.
    pub fn for_steps(kind: LatticeKind, steps: usize) -> Self {
        let extent = steps as i64 + 1;
        Self { kind, lo: -extent, hi: extent, boundary: Boundary::HardFail }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    /// Largest coordinate magnitude on the lattice.
    pub fn extent(&self) -> i64 {
        self.hi.max(-self.lo)
    }

    pub fn side(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn site_count(&self) -> usize {
        self.side().pow(self.kind.axes() as u32)
    }

    pub fn contains(&self, site: &Site) -> bool {
        let axes = self.kind.axes();
        site.iter()
            .enumerate()
            .all(|(a, &n)| if a < axes { (self.lo..=self.hi).contains(&n) } else { n == 0 })
    }

    /// Folds a coordinate back into `lo..=hi`.
    pub fn wrap(&self, n: i64) -> i64 {
        (n - self.lo).rem_euclid(self.side() as i64) + self.lo
    }

    /// Position of `site` in the canonical flat ordering (first axis slowest).
    pub fn site_index(&self, site: &Site) -> usize {
        let side = self.side();
        (0..self.kind.axes()).fold(0, |acc, a| acc * side + (site[a] - self.lo) as usize)
    }

    pub fn site_at(&self, mut index: usize) -> Site {
        let side = self.side();
        let axes = self.kind.axes();
        let mut site = [0; 3];
        for a in (0..axes).rev() {
            site[a] = (index % side) as i64 + self.lo;
            index /= side;
        }
        site
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftSign {
    /// `(axis, +)` moves toward −1 and `(axis, −)` toward +1.
    #[default]
    #[serde(rename = "paper")]
    Standard,
    /// Every shift negated.
    Mirrored,
}

/// Component ordering and shift directions.
///
/// Components are ordered axis-major, direction-minor: line `(+, −)`,
/// square `(1,+), (1,−), (2,+), (2,−)`, graphene `(1,+), (1,−), …, (3,−)`.
/// This matches the Kronecker order `axis ⊗ direction` of the composite coins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChiralityConvention {
    pub shift_sign: ShiftSign,
}

impl ChiralityConvention {
    pub fn new(shift_sign: ShiftSign) -> Self {
        Self { shift_sign }
    }

    /// `(axis, delta)` a component moves by under one shift.
    pub fn displacement(&self, component: usize) -> (usize, i64) {
        let axis = component / 2;
        let delta = if component.is_multiple_of(2) { -1 } else { 1 };
        match self.shift_sign {
            ShiftSign::Standard => (axis, delta),
            ShiftSign::Mirrored => (axis, -delta),
        }
    }

    pub fn component_label(kind: LatticeKind, component: usize) -> String {
        let dir = if component.is_multiple_of(2) { '+' } else { '-' };
        match kind {
            LatticeKind::Line => dir.to_string(),
            _ => format!("{}{}", component / 2 + 1, dir),
        }
    }
}
