// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

use thiserror::Error;

/// Command failures, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Exit 1: outputs were written but a check did not meet its tolerance.
    #[error("tolerance check failed: {0}")]
    Tolerance(String),
    /// Exit 2: bad arguments, unreadable or invalid config, unknown coin.
    #[error("{0}")]
    Usage(String),
    /// Exit 3: the engine or the filesystem failed mid-run.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Tolerance(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        })
    }
}

pub fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}
