// SPDX-License-Identifier: Apache-2.0

//! Parity-chain decomposition and dark-like states of the multi-qubit,
//! multi-photon Rabi model
//!
//! ```text
//! H = ω a†a + Σ_k g_k σ_k^x (a^M + a†^M) + Σ_k Δ_k σ_k^z
//! ```

pub mod blocks;
pub mod darksolver;
pub mod error;
pub mod model;
pub mod omatrix;
pub mod spectrum;

pub use blocks::{
    assemble_chain, blocks_for_cutoff, dense_oracle, dense_oracle_capped, diag_block,
    offdiag_factor, BlockChain, DenseOracle,
};
pub use darksolver::{
    build_state, catalog_match, generic_scan, lift_state, lift_to_multiphoton, verify_state,
    DarkLikeState, FamilyCondition, ScanOptions, VerifyReport,
};
pub use error::{Error, Result};
pub use model::{
    chain_sequence, parity_chain_basis, ModelParams, Parity, ParityChainBasis, QubitConfig,
    SubspaceLabel,
};
pub use omatrix::{coupling_matrix, sign_pattern_eigs, zero_modes, SignPattern, ZeroModeBasis};
pub use spectrum::{
    chain_union_spectrum, detect_horizontal, diagonalize_chain, stability_check, sweep,
    HorizontalLine, SpectrumSweep, StabilityRegime, StabilityReport, SweepOptions,
};
