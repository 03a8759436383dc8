// SPDX-License-Identifier: Apache-2.0

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::blocks::BlockChain;
use crate::error::{Error, Result};
use crate::model::{parity_chain_basis, QubitConfig, SubspaceLabel};

/// One coefficient of `|n, q⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    pub photon: usize,
    pub qubits: QubitConfig,
    pub value: f64,
}

/// An eigenstate with bounded photon support, stored as sparse amplitudes
/// in chain order (photon number, then position in the sector list).
#[derive(Debug, Clone, PartialEq)]
pub struct DarkLikeState {
    pub label: SubspaceLabel,
    pub n_qubits: usize,
    /// Energy in the units of the model parameters.
    pub energy: f64,
    pub family: String,
    pub normalized: bool,
    amplitudes: Vec<Amplitude>,
}

impl DarkLikeState {
    /// Collects terms, summing repeated basis states and dropping zeros.
    pub fn from_terms<I>(
        label: SubspaceLabel,
        n_qubits: usize,
        energy: f64,
        family: impl Into<String>,
        terms: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, QubitConfig, f64)>,
    {
        let basis = parity_chain_basis(n_qubits)?;
        let mut amps: Vec<Amplitude> = Vec::new();
        for (photon, qubits, value) in terms {
            if qubits.len() != n_qubits {
                return Err(Error::Structural(format!(
                    "configuration {qubits} has {} qubits, expected {n_qubits}",
                    qubits.len()
                )));
            }
            match amps
                .iter_mut()
                .find(|a| a.photon == photon && a.qubits == qubits)
            {
                Some(a) => a.value += value,
                None => amps.push(Amplitude {
                    photon,
                    qubits,
                    value,
                }),
            }
        }
        amps.retain(|a| a.value != 0.0);
        amps.sort_by_key(|a| (a.photon, basis.index_of(a.qubits)));
        let mut s = DarkLikeState {
            label,
            n_qubits,
            energy,
            family: family.into(),
            normalized: false,
            amplitudes: amps,
        };
        s.normalized = (s.norm() - 1.0).abs() < 1e-12;
        Ok(s)
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn amplitude(&self, photon: usize, qubits: QubitConfig) -> f64 {
        self.amplitudes
            .iter()
            .find(|a| a.photon == photon && a.qubits == qubits)
            .map_or(0.0, |a| a.value)
    }

    /// Largest photon number with a nonzero amplitude.
    pub fn max_photon(&self) -> usize {
        self.amplitudes.iter().map(|a| a.photon).max().unwrap_or(0)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.value * a.value)
            .sum::<f64>()
            .sqrt()
    }

    /// Unit-norm copy whose first amplitude in chain order is positive.
    pub fn normalized_view(&self) -> DarkLikeState {
        let norm = self.norm();
        let sign = match self.amplitudes.first() {
            Some(a) if a.value < 0.0 => -1.0,
            _ => 1.0,
        };
        let scale = if norm > 0.0 { sign / norm } else { 1.0 };
        DarkLikeState {
            amplitudes: self
                .amplitudes
                .iter()
                .map(|a| Amplitude {
                    value: a.value * scale,
                    ..*a
                })
                .collect(),
            normalized: norm > 0.0,
            ..self.clone()
        }
    }

    /// `⟨self|other⟩ / (‖self‖ ‖other‖)`.
    pub fn overlap(&self, other: &DarkLikeState) -> f64 {
        let dot: f64 = self
            .amplitudes
            .iter()
            .map(|a| a.value * other.amplitude(a.photon, a.qubits))
            .sum();
        dot / (self.norm() * other.norm())
    }

    /// Checks that every amplitude lies on chain `label` with `photon_order`.
    pub fn check_support(&self, photon_order: usize) -> Result<()> {
        for a in &self.amplitudes {
            let j = self.label.block_of(a.photon, photon_order).ok_or_else(|| {
                Error::Structural(format!(
                    "photon number {} is not in chain {} for M = {photon_order}",
                    a.photon, self.label
                ))
            })?;
            if a.qubits.sector() != self.label.sector_at(j) {
                return Err(Error::Structural(format!(
                    "|{}, {}⟩ lies in sector {} but block {j} of chain {} is {}",
                    a.photon,
                    a.qubits,
                    a.qubits.sector(),
                    self.label,
                    self.label.sector_at(j)
                )));
            }
        }
        Ok(())
    }

    /// Coefficient vector in the basis of `chain`.
    pub fn to_chain_vector(&self, chain: &BlockChain) -> Result<DVector<f64>> {
        if chain.label != self.label || chain.n_qubits != self.n_qubits {
            return Err(Error::Structural(format!(
                "state on {} with {} qubits does not match chain {} with {} qubits",
                self.label, self.n_qubits, chain.label, chain.n_qubits
            )));
        }
        self.check_support(chain.photon_order)?;
        let basis = parity_chain_basis(self.n_qubits)?;
        let mut v = DVector::zeros(chain.dim());
        for a in &self.amplitudes {
            let j = self
                .label
                .block_of(a.photon, chain.photon_order)
                .expect("support checked");
            if j >= chain.n_blocks {
                return Err(Error::Structural(format!(
                    "photon number {} beyond the {} assembled blocks",
                    a.photon, chain.n_blocks
                )));
            }
            v[j * chain.block_dim + basis.index_of(a.qubits)] = a.value;
        }
        Ok(v)
    }

    pub fn to_json(&self) -> StateJson {
        StateJson {
            subspace: self.label,
            energy: self.energy,
            family: self.family.clone(),
            max_photon: self.max_photon(),
            amplitudes: self
                .amplitudes
                .iter()
                .map(|a| AmplitudeJson {
                    photon: a.photon,
                    qubits: a.qubits.to_string(),
                    value: a.value,
                })
                .collect(),
        }
    }

    pub fn from_json(j: &StateJson) -> Result<Self> {
        let first = j
            .amplitudes
            .first()
            .ok_or_else(|| Error::InvalidParameter("state has no amplitudes".into()))?;
        let n_qubits = first.qubits.chars().count();
        let terms = j
            .amplitudes
            .iter()
            .map(|a| Ok((a.photon, QubitConfig::parse(&a.qubits)?, a.value)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(j.subspace, n_qubits, j.energy, j.family.clone(), terms)
    }
}

impl Serialize for DarkLikeState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Wire form of a [`DarkLikeState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub subspace: SubspaceLabel,
    pub energy: f64,
    pub family: String,
    pub max_photon: usize,
    pub amplitudes: Vec<AmplitudeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeJson {
    pub photon: usize,
    pub qubits: String,
    pub value: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Parity;

    fn q(s: &str) -> QubitConfig {
        QubitConfig::parse(s).unwrap()
    }

    fn sample() -> DarkLikeState {
        DarkLikeState::from_terms(
            SubspaceLabel::new(0, Parity::Even),
            2,
            1.0,
            "test",
            [(1, q("du"), 1.0), (0, q("uu"), -0.8), (1, q("ud"), -1.0)],
        )
        .unwrap()
    }

    #[test]
    fn chain_order_and_max_photon() {
        let s = sample();
        let order: Vec<_> = s
            .amplitudes()
            .iter()
            .map(|a| (a.photon, a.qubits.to_string()))
            .collect();
        assert_eq!(
            order,
            [(0, "uu".into()), (1, "ud".into()), (1, "du".into())]
        );
        assert_eq!(s.max_photon(), 1);
        assert!(!s.normalized);
    }

    #[test]
    fn normalized_view_fixes_sign() {
        let n = sample().normalized_view();
        assert!((n.norm() - 1.0).abs() < 1e-15);
        assert!(n.amplitudes()[0].value > 0.0);
        assert!(n.normalized);
        assert!((n.overlap(&sample()) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_shape() {
        let j = serde_json::to_value(sample().to_json()).unwrap();
        assert_eq!(j["subspace"]["i"], 0);
        assert_eq!(j["subspace"]["parity"], "+");
        assert_eq!(j["max_photon"], 1);
        assert_eq!(j["amplitudes"][0]["qubits"], "uu");
        let back: StateJson = serde_json::from_value(j).unwrap();
        assert_eq!(DarkLikeState::from_json(&back).unwrap(), sample());
    }

    #[test]
    fn support_checks() {
        let s = sample();
        assert!(s.check_support(1).is_ok());
        // Photon 1 is not on the i = 0 chain when M = 2.
        assert!(matches!(s.check_support(2), Err(Error::Structural(_))));
        let wrong = DarkLikeState::from_terms(
            SubspaceLabel::new(0, Parity::Even),
            2,
            0.0,
            "x",
            [(0, q("ud"), 1.0)],
        )
        .unwrap();
        assert!(matches!(wrong.check_support(1), Err(Error::Structural(_))));
    }
}
