// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::state::DarkLikeState;
use crate::blocks::assemble_chain;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Default residual tolerance for [`verify_state`].
pub const VERIFY_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    /// `‖Hψ − Eψ‖ / ‖ψ‖` with `E` the claimed energy.
    pub residual: f64,
    /// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`.
    pub measured_energy: f64,
    pub claimed_energy: f64,
    pub blocks: usize,
    pub tol: f64,
    pub passed: bool,
}

/// Applies the assembled chain to `state` and reports how far it is from an eigenvector.
pub fn verify_state(params: &ModelParams, state: &DarkLikeState, tol: f64) -> Result<VerifyReport> {
    params.validate()?;
    if state.n_qubits != params.n_qubits {
        return Err(Error::Structural(format!(
            "state has {} qubits, model has {}",
            state.n_qubits, params.n_qubits
        )));
    }
    let m = params.photon_order;
    state.label.validate(m)?;
    state.check_support(m)?;
    let top = state.max_photon().max(state.label.initial);
    let blocks = (top - state.label.initial) / m + 2;
    let chain = assemble_chain(params, state.label, blocks)?;
    let psi = state.to_chain_vector(&chain)?;
    let norm2 = psi.norm_squared();
    if norm2 == 0.0 {
        return Err(Error::Structural("state has no amplitudes".into()));
    }
    let h_psi = chain.apply(&psi) * params.omega;
    let measured_energy = psi.dot(&h_psi) / norm2;
    let residual = (h_psi - &psi * state.energy).norm() / norm2.sqrt();
    Ok(VerifyReport {
        residual,
        measured_energy,
        claimed_energy: state.energy,
        blocks,
        tol,
        passed: residual < tol,
    })
}
