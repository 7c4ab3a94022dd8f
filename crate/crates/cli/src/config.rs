// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON experiment configs.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "name": "hadamard_line",
//!   "lattice": { "kind": "line" },
//!   "coin": { "name": "hadamard2" },
//!   "mode": "additive",
//!   "chirality": [[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]],
//!   "steps": 500
//! }
//! ```

use std::path::Path;

use num_complex::Complex64;
use qwalk::analysis::Metric;
use qwalk::coins::coin_by_name;
use qwalk::engine::{
    initial_state, Boundary, ChiralityConvention, EngineError, Evolution, LatticeDescriptor, LatticeKind, Mode,
    ShiftSign, Site, WalkState,
};
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub lattice: LatticeConfig,
    pub coin: CoinConfig,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Initial coin state as `[re, im]` pairs; normalized on load.
    pub chirality: Vec<[f64; 2]>,
    /// Starting site, one coordinate per axis. Defaults to the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<Vec<i64>>,
    pub steps: usize,
    /// Write a distribution every this many steps; 0 writes the final one only.
    #[serde(default)]
    pub record_every: usize,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub shift_sign: ShiftSign,
    /// Sample spacing for `variance`.
    #[serde(default = "default_stride")]
    pub variance_stride: usize,
    /// File stem for outputs; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub kind: LatticeKind,
    /// Half-width. Defaults to just enough room for `steps` from the start site.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<i64>,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoinConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
}

fn default_mode() -> Mode {
    Mode::Additive
}

fn default_stride() -> usize {
    1
}

fn default_boundary() -> Boundary {
    Boundary::HardFail
}

/// A validated config, ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub lattice: LatticeDescriptor,
    pub evolution: Evolution,
    pub chirality: Vec<Complex64>,
    pub site: Site,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    pub fn stem(&self) -> &str {
        self.output.as_deref().unwrap_or(&self.name)
    }

    pub fn validate(self) -> Result<Experiment, CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(usage(format!("unsupported schema {}, expected {SCHEMA_VERSION}", self.schema)));
        }
        check_stem("name", &self.name)?;
        if let Some(out) = &self.output {
            check_stem("output", out)?;
        }
        if self.variance_stride == 0 {
            return Err(usage("variance_stride must be at least 1"));
        }

        let kind = self.lattice.kind;
        let axes = kind.axes();
        let mut site: Site = [0; 3];
        if let Some(s) = &self.site {
            if s.len() != axes {
                return Err(usage(format!("site has {} coordinates, a {kind:?} lattice needs {axes}", s.len())));
            }
            site[..axes].copy_from_slice(s);
        }
        let extent = match self.lattice.extent {
            Some(e) => e,
            None => {
                let reach = site.iter().map(|n| n.abs()).max().unwrap_or(0);
                i64::try_from(self.steps).map_err(usage)?.saturating_add(1).saturating_add(reach)
            }
        };
        let lattice = LatticeDescriptor::new(kind, extent, self.lattice.boundary).map_err(usage)?;

        let coin = coin_by_name(&self.coin.name, &self.coin.params).map_err(usage)?;
        let evolution = Evolution::new(kind, self.mode, coin).map_err(usage)?;

        if self.chirality.iter().flatten().any(|x| !x.is_finite()) {
            return Err(usage("chirality entries must be finite"));
        }
        let chirality: Vec<Complex64> = self.chirality.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        // Surface length, zero-vector and bounds errors now rather than at run time.
        initial_state(lattice, &chirality, site).map_err(usage)?;

        Ok(Experiment { config: self, lattice, evolution, chirality, site })
    }
}

fn check_stem(field: &str, s: &str) -> Result<(), CliError> {
    let ok = !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok && !s.starts_with('.') {
        Ok(())
    } else {
        Err(usage(format!("{field} `{s}` must be a non-empty file stem of [A-Za-z0-9_.-]")))
    }
}

impl Experiment {
    pub fn convention(&self) -> ChiralityConvention {
        ChiralityConvention::new(self.config.shift_sign)
    }

    pub fn initial_state(&self) -> Result<WalkState, EngineError> {
        Ok(initial_state(self.lattice, &self.chirality, self.site)?.with_convention(self.convention()))
    }
}
