// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

//! Coin registry, spin Hamiltonians `H_S = i·ln S`, and the graphene
//! direction operators.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::{principal_log_unitary, ComplexMatrix, MatrixError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoinError {
    #[error("unknown coin `{0}`")]
    UnknownCoin(String),
    #[error("bad parameter for coin `{name}`: {reason}")]
    BadParam { name: String, reason: String },
    #[error("expected a {expected}-dimensional coin, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Names accepted by [`coin_by_name`], in registry order (without `identity`).
pub const REGISTRY_NAMES: [&str; 9] =
    ["hadamard2", "so2", "su2x", "y2", "hadamard4", "grover4", "dft4", "grover3", "dft3"];

/// Rotation angle used when the parametric coins appear in [`registry`].
pub const REGISTRY_THETA: f64 = PI / 3.0;

/// `ω = (−1 + √3 i)/2`, a primitive cube root of unity.
pub fn omega() -> Complex64 {
    Complex64::new(-0.5, 3f64.sqrt() / 2.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct CoinSpec {
    /// Canonical name, parameters included, e.g. `so2(0.5)`.
    pub name: String,
    pub dim: usize,
    pub matrix: ComplexMatrix,
    pub params: Vec<f64>,
    pub reference: String,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn theta_param(name: &str, params: &[f64]) -> Result<f64, CoinError> {
    match params {
        [theta] if theta.is_finite() => Ok(*theta),
        [theta] => Err(CoinError::BadParam {
            name: name.into(),
            reason: format!("θ must be finite, got {theta}"),
        }),
        _ => Err(CoinError::BadParam {
            name: name.into(),
            reason: format!("expected exactly one angle, got {}", params.len()),
        }),
    }
}

fn no_params(name: &str, params: &[f64]) -> Result<(), CoinError> {
    if params.is_empty() {
        Ok(())
    } else {
        Err(CoinError::BadParam { name: name.into(), reason: "takes no parameters".into() })
    }
}

fn su2x_matrix(theta: f64) -> ComplexMatrix {
    let (s, co) = theta.sin_cos();
    ComplexMatrix::from_rows(&[[c(co, 0.0), c(0.0, s)], [c(0.0, s), c(co, 0.0)]])
}

/// Looks up a coin by canonical name. `so2` and `su2x` take one angle (radians),
/// `identity` takes its dimension; the rest take no parameters.
pub fn coin_by_name(name: &str, params: &[f64]) -> Result<CoinSpec, CoinError> {
    let half = c(0.5, 0.0);
    let (matrix, reference, canonical) = match name {
        "hadamard2" => {
            no_params(name, params)?;
            let m = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [1.0, -1.0]]).scale(c(FRAC_1_SQRT_2, 0.0));
            (m, "Hadamard coin H_c", name.to_string())
        }
        "so2" => {
            let theta = theta_param(name, params)?;
            let (s, co) = theta.sin_cos();
            let m = ComplexMatrix::from_real_rows(&[[co, -s], [s, co]]);
            (m, "SO(2) rotation [[cos θ, −sin θ], [sin θ, cos θ]]", format!("so2({theta})"))
        }
        "su2x" => {
            let theta = theta_param(name, params)?;
            (su2x_matrix(theta), "SU(2) rotation [[cos θ, i sin θ], [i sin θ, cos θ]]", format!("su2x({theta})"))
        }
        "y2" => {
            no_params(name, params)?;
            (su2x_matrix(PI / 4.0), "Y coin, su2x at θ = π/4", name.to_string())
        }
        "hadamard4" => {
            no_params(name, params)?;
            let m = ComplexMatrix::from_real_rows(&[
                [1.0, 1.0, 1.0, 1.0],
                [1.0, -1.0, 1.0, -1.0],
                [1.0, 1.0, -1.0, -1.0],
                [1.0, -1.0, -1.0, 1.0],
            ])
            .scale(half);
            (m, "H ⊗ H, 4D Hadamard coin", name.to_string())
        }
        "grover4" => {
            no_params(name, params)?;
            let m = ComplexMatrix::from_real_rows(&[
                [-1.0, 1.0, 1.0, 1.0],
                [1.0, -1.0, 1.0, 1.0],
                [1.0, 1.0, -1.0, 1.0],
                [1.0, 1.0, 1.0, -1.0],
            ])
            .scale(half);
            (m, "4D Grover coin", name.to_string())
        }
        "dft4" => {
            no_params(name, params)?;
            let (o, i) = (c(1.0, 0.0), c(0.0, 1.0));
            let m = ComplexMatrix::from_rows(&[[o, o, o, o], [o, i, -o, -i], [o, -o, o, -o], [o, -i, -o, i]])
                .scale(half);
            (m, "4D DFT coin", name.to_string())
        }
        "grover3" => {
            no_params(name, params)?;
            let m = ComplexMatrix::from_real_rows(&[[-1.0, 2.0, 2.0], [2.0, -1.0, 2.0], [2.0, 2.0, -1.0]])
                .scale(c(1.0 / 3.0, 0.0));
            (m, "3D Grover coin", name.to_string())
        }
        "dft3" => {
            no_params(name, params)?;
            let (o, w) = (c(1.0, 0.0), omega());
            let w2 = w * w;
            // ω⁴ = ω
            let m = ComplexMatrix::from_rows(&[[o, o, o], [o, w, w2], [o, w2, w]]).scale(c(1.0 / 3f64.sqrt(), 0.0));
            (m, "3D DFT coin", name.to_string())
        }
        "identity" => {
            let dim = match params {
                [d] if d.fract() == 0.0 && matches!(*d as usize, 2 | 3 | 4 | 6) => *d as usize,
                _ => {
                    return Err(CoinError::BadParam {
                        name: name.into(),
                        reason: "dimension must be one of 2, 3, 4, 6".into(),
                    })
                }
            };
            (ComplexMatrix::identity(dim), "identity coin", format!("identity({dim})"))
        }
        other => return Err(CoinError::UnknownCoin(other.to_string())),
    };
    Ok(CoinSpec {
        name: canonical,
        dim: matrix.dim(),
        matrix,
        params: params.to_vec(),
        reference: reference.to_string(),
    })
}

/// Parses `name` or `name(p1, p2, ...)` and looks the coin up.
pub fn parse_coin(spec: &str) -> Result<CoinSpec, CoinError> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        return coin_by_name(spec, &[]);
    };
    let name = &spec[..open];
    let inner = spec[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| CoinError::BadParam { name: name.into(), reason: "missing `)`".into() })?;
    let params = inner
        .split(',')
        .map(|p| {
            p.trim().parse::<f64>().map_err(|e| CoinError::BadParam {
                name: name.into(),
                reason: format!("`{}`: {e}", p.trim()),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    coin_by_name(name, &params)
}

/// The nine named coins, parametric ones at [`REGISTRY_THETA`].
pub fn registry() -> Vec<CoinSpec> {
    REGISTRY_NAMES
        .iter()
        .map(|&name| {
            let params: &[f64] = if matches!(name, "so2" | "su2x") { &[REGISTRY_THETA] } else { &[] };
            coin_by_name(name, params).expect("registry coins are valid")
        })
        .collect()
}

/// `H_S = i·ln S` with the time step fixed to one.
pub fn spin_hamiltonian(coin: &CoinSpec) -> Result<ComplexMatrix, CoinError> {
    Ok(principal_log_unitary(&coin.matrix)?.scale(c(0.0, 1.0)))
}

/// For an involution `S² = I` the generator reduces to `−π·P₋₁` with
/// `P₋₁ = (I − S)/2`. Returns `None` when `S` is not an involution.
pub fn involution_generator(coin: &CoinSpec) -> Option<ComplexMatrix> {
    let s = &coin.matrix;
    let id = ComplexMatrix::identity(s.dim());
    if s.mul(s).ok()?.max_abs_diff(&id) > 1e-10 {
        return None;
    }
    let p_minus = id.sub(s).ok()?.scale(c(0.5, 0.0));
    Some(p_minus.scale(c(-PI, 0.0)))
}

/// Direction-flipping operators `M₁, M₂, M₃` of the honeycomb walk.
#[derive(Debug, Clone)]
pub struct DirectionOperators {
    pub m1: ComplexMatrix,
    pub m2: ComplexMatrix,
    pub m3: ComplexMatrix,
}

impl DirectionOperators {
    pub fn get(&self, axis: usize) -> &ComplexMatrix {
        match axis {
            0 => &self.m1,
            1 => &self.m2,
            2 => &self.m3,
            _ => panic!("graphene has three axes, got axis {axis}"),
        }
    }
}

pub fn graphene_direction_ops() -> DirectionOperators {
    let (z, o, w) = (c(0.0, 0.0), c(1.0, 0.0), omega());
    let w2 = w * w;
    DirectionOperators {
        m1: ComplexMatrix::from_rows(&[[z, o], [o, z]]),
        m2: ComplexMatrix::from_rows(&[[z, w2], [w, z]]),
        m3: ComplexMatrix::from_rows(&[[z, w], [w2, z]]),
    }
}

/// `𝕄 = S₁⊗M₁ + S₂⊗M₂ + S₃⊗M₃`, where `Sᵢ` keeps only row `i` of `S`.
pub fn compose_graphene_coin(s3: &CoinSpec) -> Result<ComplexMatrix, CoinError> {
    compose_graphene_matrix(&s3.matrix)
}

pub fn compose_graphene_matrix(s: &ComplexMatrix) -> Result<ComplexMatrix, CoinError> {
    if s.dim() != 3 {
        return Err(CoinError::DimensionMismatch { expected: 3, got: s.dim() });
    }
    let residual = s.unitarity_residual();
    if residual > crate::matrix::PRECONDITION_TOL {
        return Err(MatrixError::NotUnitary { residual }.into());
    }
    let ops = graphene_direction_ops();
    let mut total = ComplexMatrix::zeros(6);
    for axis in 0..3 {
        let mut row_only = ComplexMatrix::zeros(3);
        for j in 0..3 {
            row_only[(axis, j)] = s[(axis, j)];
        }
        total = total.add(&row_only.kron(ops.get(axis)))?;
    }
    Ok(total)
}
