// SPDX-License-Identifier: Apache-2.0

//! Parameter sets shared by the benchmarks.

use rabichain::ModelParams;

/// Three qubits with `g1 = g2 + g3` and unit splittings.
pub fn three_qubit() -> ModelParams {
    ModelParams::single_photon(vec![1.5, 1.0, 0.5], vec![1.0; 3]).expect("valid")
}

/// Four qubits with equal couplings.
pub fn four_qubit() -> ModelParams {
    ModelParams::single_photon(vec![0.5; 4], vec![1.2, 0.2, 0.3, 0.3]).expect("valid")
}

/// Two qubits, two-photon coupling below the stability threshold.
pub fn two_photon() -> ModelParams {
    ModelParams::new(2, 2, 1.0, vec![0.2, 0.2], vec![1.6, 0.4]).expect("valid")
}

/// Random-looking but fixed couplings for `n` qubits.
pub fn generic(n: usize) -> ModelParams {
    let g = (0..n).map(|k| 0.1 + 0.07 * k as f64).collect();
    let d = (0..n).map(|k| 0.3 + 0.11 * k as f64).collect();
    ModelParams::single_photon(g, d).expect("valid")
}
