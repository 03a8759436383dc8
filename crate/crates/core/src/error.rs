// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced by the model, assembly, solver and spectrum layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("off-diagonal factor overflows f64 (M={photon_order}, i={initial}, j={block})")]
    Overflow {
        photon_order: usize,
        initial: usize,
        block: usize,
    },

    #[error("decoupled limit: {0}")]
    DecoupledLimit(String),

    #[error("family constraints not satisfied: {0}")]
    ConstraintViolated(String),

    #[error("state support outside chain: {0}")]
    Structural(String),

    #[error("stability violation: {0}")]
    Stability(String),

    #[error("not converged: {0}")]
    NotConverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;
