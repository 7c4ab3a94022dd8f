// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::lattice::{LatticeKind, Site};
use super::state::WalkState;

/// Marginal position distribution, summed over chirality.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    kind: LatticeKind,
    probs: BTreeMap<Site, f64>,
}

/// Exact planar key for a graphene site: `(n₂ − n₃, −2n₁ + n₂ + n₃)`.
/// Triples differing by `(δ, δ, δ)` share a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EuclideanKey(pub i64, pub i64);

impl EuclideanKey {
    pub fn of(site: &Site) -> Self {
        EuclideanKey(site[1] - site[2], -2 * site[0] + site[1] + site[2])
    }

    pub fn xy(self) -> (f64, f64) {
        (3f64.sqrt() / 2.0 * self.0 as f64, self.1 as f64 / 2.0)
    }
}

/// Planar coordinates `x = √3(n₂ − n₃)/2`, `y = −n₁ + (n₂ + n₃)/2`.
pub fn graphene_euclidean(site: &Site) -> (f64, f64) {
    EuclideanKey::of(site).xy()
}

pub fn probability_distribution(state: &WalkState) -> Distribution {
    let probs = state
        .site_amplitudes()
        .into_iter()
        .map(|(site, amps)| (site, amps.iter().map(|z| z.norm_sqr()).sum::<f64>()))
        .filter(|(_, p)| *p > 0.0)
        .collect();
    Distribution { kind: state.lattice().kind, probs }
}

impl Distribution {
    pub fn from_map(kind: LatticeKind, probs: BTreeMap<Site, f64>) -> Self {
        Self { kind, probs }
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn probabilities(&self) -> &BTreeMap<Site, f64> {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Graphene probabilities merged by planar position. Other lattices are
    /// keyed by `(x, y)` index directly.
    pub fn euclidean(&self) -> BTreeMap<EuclideanKey, f64> {
        let mut out = BTreeMap::new();
        for (site, p) in &self.probs {
            let key = match self.kind {
                LatticeKind::Graphene => EuclideanKey::of(site),
                _ => EuclideanKey(site[0], site[1]),
            };
            *out.entry(key).or_insert(0.0) += p;
        }
        out
    }

    /// CSV with header `x,probability`, `x,y,probability` or, for graphene,
    /// `n1,n2,n3,x,y,probability`. Reals use the shortest representation that
    /// round-trips.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        match self.kind {
            LatticeKind::Line => {
                s.push_str("x,probability\n");
                for (site, p) in &self.probs {
                    let _ = writeln!(s, "{},{p:?}", site[0]);
                }
            }
            LatticeKind::Square => {
                s.push_str("x,y,probability\n");
                for (site, p) in &self.probs {
                    let _ = writeln!(s, "{},{},{p:?}", site[0], site[1]);
                }
            }
            LatticeKind::Graphene => {
                s.push_str("n1,n2,n3,x,y,probability\n");
                for (site, p) in &self.probs {
                    let (x, y) = graphene_euclidean(site);
                    let _ = writeln!(s, "{},{},{},{x:?},{y:?},{p:?}", site[0], site[1], site[2]);
                }
            }
        }
        s
    }

    /// Graphene distribution aggregated by planar position, `x,y,probability`.
    pub fn to_euclidean_csv(&self) -> String {
        let mut s = String::from("x,y,probability\n");
        for (key, p) in self.euclidean() {
            let (x, y) = key.xy();
            let _ = writeln!(s, "{x:?},{y:?},{p:?}");
        }
        s
    }
}
