// SPDX-License-Identifier: Apache-2.0

//! Model parameters, qubit configurations and the parity-chain bases.
//!
//! Qubit configurations are bit patterns: bit `k` set means qubit `k + 1` is
//! up. The two Πσz sectors are listed in the order produced by appending
//! qubit `N` to the `N - 1` lists, so that the coupling block between the
//! sectors is exactly the recursively defined `O_N`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest qubit count accepted anywhere in the crate.
pub const MAX_QUBITS: usize = 16;

/// Parameters of `H = ω a†a + Σ g_k σ_kx (a^M + a†^M) + Σ Δ_k σ_kz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n_qubits: usize,
    pub photon_order: usize,
    #[serde(default = "default_omega")]
    pub omega: f64,
    pub couplings: Vec<f64>,
    pub splittings: Vec<f64>,
}

fn default_omega() -> f64 {
    1.0
}

impl ModelParams {
    pub fn new(
        n_qubits: usize,
        photon_order: usize,
        omega: f64,
        couplings: Vec<f64>,
        splittings: Vec<f64>,
    ) -> Result<Self> {
        let p = ModelParams {
            n_qubits,
            photon_order,
            omega,
            couplings,
            splittings,
        };
        p.validate()?;
        Ok(p)
    }

    /// Single-photon model with `ω = 1`.
    pub fn single_photon(couplings: Vec<f64>, splittings: Vec<f64>) -> Result<Self> {
        Self::new(couplings.len(), 1, 1.0, couplings, splittings)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n}"
            )));
        }
        if self.photon_order == 0 {
            return Err(Error::InvalidParameter("photon_order must be >= 1".into()));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive and finite, got {}",
                self.omega
            )));
        }
        if self.couplings.len() != n || self.splittings.len() != n {
            return Err(Error::InvalidParameter(format!(
                "expected {n} couplings and splittings, got {} and {}",
                self.couplings.len(),
                self.splittings.len()
            )));
        }
        if let Some(g) = self
            .couplings
            .iter()
            .find(|g| !(g.is_finite() && **g >= 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "couplings must be finite and non-negative, got {g}"
            )));
        }
        if let Some(d) = self.splittings.iter().find(|d| !d.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "splittings must be finite, got {d}"
            )));
        }
        Ok(())
    }

    /// Copy with couplings and splittings expressed in units of `ω`.
    pub fn reduced(&self) -> ModelParams {
        let w = self.omega;
        ModelParams {
            n_qubits: self.n_qubits,
            photon_order: self.photon_order,
            omega: 1.0,
            couplings: self.couplings.iter().map(|g| g / w).collect(),
            splittings: self.splittings.iter().map(|d| d / w).collect(),
        }
    }

    /// Copy with every coupling multiplied by `s`.
    pub fn with_coupling_scale(&self, s: f64) -> ModelParams {
        ModelParams {
            couplings: self.couplings.iter().map(|g| g * s).collect(),
            ..self.clone()
        }
    }

    pub fn block_dim(&self) -> usize {
        1 << (self.n_qubits - 1)
    }

    pub fn coupling_sum(&self) -> f64 {
        self.couplings.iter().sum()
    }

    /// All `2M` subspace labels, ordered `(0,+), (0,-), (1,+), ...`.
    pub fn subspaces(&self) -> Vec<SubspaceLabel> {
        (0..self.photon_order)
            .flat_map(|i| {
                [Parity::Even, Parity::Odd]
                    .into_iter()
                    .map(move |p| SubspaceLabel {
                        initial: i,
                        parity: p,
                    })
            })
            .collect()
    }

    /// `Σ_k Δ_k z_k(q)` in the units of the parameters.
    pub fn qubit_energy(&self, q: QubitConfig) -> f64 {
        self.splittings
            .iter()
            .enumerate()
            .map(|(k, d)| d * q.z(k) as f64)
            .sum()
    }
}

/// A product state of `N` qubits in the σz eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitConfig {
    bits: u32,
    n: u8,
}

impl QubitConfig {
    pub fn new(bits: u32, n: usize) -> Self {
        debug_assert!(n <= MAX_QUBITS && (bits >> n) == 0);
        QubitConfig { bits, n: n as u8 }
    }

    pub fn all_down(n: usize) -> Self {
        Self::new(0, n)
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn len(self) -> usize {
        self.n as usize
    }

    pub fn is_empty(self) -> bool {
        self.n == 0
    }

    pub fn is_up(self, k: usize) -> bool {
        (self.bits >> k) & 1 == 1
    }

    /// σz eigenvalue of qubit `k` (0-based).
    pub fn z(self, k: usize) -> i32 {
        if self.is_up(k) {
            1
        } else {
            -1
        }
    }

    pub fn sigma_z_product(self) -> i32 {
        let downs = self.n as u32 - self.bits.count_ones();
        if downs.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn sector(self) -> Parity {
        Parity::from_sign(self.sigma_z_product())
    }

    pub fn flip(self, k: usize) -> Self {
        QubitConfig {
            bits: self.bits ^ (1 << k),
            n: self.n,
        }
    }

    pub fn with(self, k: usize, up: bool) -> Self {
        let bits = if up {
            self.bits | (1 << k)
        } else {
            self.bits & !(1 << k)
        };
        QubitConfig { bits, n: self.n }
    }

    /// Appends one more qubit in the given state.
    pub fn extend(self, up: bool) -> Self {
        let n = self.n as usize;
        QubitConfig {
            bits: self.bits | ((up as u32) << n),
            n: self.n + 1,
        }
    }

    /// Parses `"ud..."` (qubit 1 first); `↑`/`↓` are accepted too.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = 0u32;
        let mut n = 0usize;
        for c in s.chars() {
            let up = match c {
                'u' | 'U' | '↑' | '1' => true,
                'd' | 'D' | '↓' | '0' => false,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "bad qubit symbol {c:?} in {s:?}"
                    )))
                }
            };
            if n >= MAX_QUBITS {
                return Err(Error::InvalidParameter(format!("too many qubits in {s:?}")));
            }
            bits |= (up as u32) << n;
            n += 1;
        }
        if n == 0 {
            return Err(Error::InvalidParameter("empty qubit string".into()));
        }
        Ok(QubitConfig::new(bits, n))
    }

    pub fn arrows(self) -> String {
        (0..self.len())
            .map(|k| if self.is_up(k) { '↑' } else { '↓' })
            .collect()
    }
}

impl fmt::Display for QubitConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len() {
            f.write_str(if self.is_up(k) { "u" } else { "d" })?;
        }
        Ok(())
    }
}

/// Sign label of a Πσz sector or of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "+")]
    Even,
    #[serde(rename = "-")]
    Odd,
}

impl Parity {
    pub fn from_sign(s: i32) -> Self {
        if s >= 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Parity::Even => '+',
            Parity::Odd => '-',
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "+1" | "even" | "e" => Ok(Parity::Even),
            "-" | "-1" | "odd" | "o" => Ok(Parity::Odd),
            other => Err(Error::InvalidParameter(format!("bad parity {other:?}"))),
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Identifies one invariant chain: initial photon number `i < M` and the
/// Πσz sign of the qubit sector at the head of the chain.
///
/// For `M = 1` the head sign equals the eigenvalue of
/// `R = exp(iπ a†a) Πσz`. For general `M` the conserved quantity is
/// `(-1)^((n - i)/M) Πσz`, which equals the head sign on every state of the
/// chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubspaceLabel {
    #[serde(rename = "i")]
    pub initial: usize,
    pub parity: Parity,
}

impl SubspaceLabel {
    pub fn new(initial: usize, parity: Parity) -> Self {
        SubspaceLabel { initial, parity }
    }

    pub fn validate(&self, photon_order: usize) -> Result<()> {
        if self.initial >= photon_order {
            return Err(Error::InvalidParameter(format!(
                "initial photon number {} must be < M = {photon_order}",
                self.initial
            )));
        }
        Ok(())
    }

    /// Sector of block `j` of the chain.
    pub fn sector_at(&self, j: usize) -> Parity {
        if j.is_multiple_of(2) {
            self.parity
        } else {
            self.parity.flipped()
        }
    }

    pub fn photon_at(&self, j: usize, photon_order: usize) -> usize {
        self.initial + j * photon_order
    }

    /// Block index of photon number `n`, if `n` belongs to this chain.
    pub fn block_of(&self, n: usize, photon_order: usize) -> Option<usize> {
        if n < self.initial || !(n - self.initial).is_multiple_of(photon_order) {
            None
        } else {
            Some((n - self.initial) / photon_order)
        }
    }

    /// Parses `"i,±"`, e.g. `"0,+"` or `"1,-"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (i, p) = s
            .split_once(',')
            .ok_or_else(|| Error::InvalidParameter(format!("bad subspace {s:?}, want i,±")))?;
        let initial = i
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad subspace index in {s:?}")))?;
        Ok(SubspaceLabel::new(initial, Parity::parse(p)?))
    }
}

impl fmt::Display for SubspaceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.initial, self.parity)
    }
}

/// The two Πσz sectors of `N` qubits in recursion order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityChainBasis {
    n: usize,
    plus: Vec<QubitConfig>,
    minus: Vec<QubitConfig>,
    position: Vec<u32>,
}

impl ParityChainBasis {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn plus(&self) -> &[QubitConfig] {
        &self.plus
    }

    pub fn minus(&self) -> &[QubitConfig] {
        &self.minus
    }

    pub fn sector(&self, p: Parity) -> &[QubitConfig] {
        match p {
            Parity::Even => &self.plus,
            Parity::Odd => &self.minus,
        }
    }

    pub fn block_dim(&self) -> usize {
        self.plus.len()
    }

    /// Index of `q` within its own sector list.
    pub fn index_of(&self, q: QubitConfig) -> usize {
        self.position[q.bits() as usize] as usize
    }
}

/// Builds the sector lists by the recursion
/// `plus(N) = [minus(N-1)⊗↓, plus(N-1)⊗↑]`, `minus(N) = [plus(N-1)⊗↓, minus(N-1)⊗↑]`.
pub fn parity_chain_basis(n: usize) -> Result<ParityChainBasis> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "qubit count must be in 1..={MAX_QUBITS}, got {n}"
        )));
    }
    let mut plus = vec![QubitConfig::new(1, 1)];
    let mut minus = vec![QubitConfig::new(0, 1)];
    for _ in 1..n {
        let next_plus = minus
            .iter()
            .map(|q| q.extend(false))
            .chain(plus.iter().map(|q| q.extend(true)))
            .collect();
        let next_minus = plus
            .iter()
            .map(|q| q.extend(false))
            .chain(minus.iter().map(|q| q.extend(true)))
            .collect();
        plus = next_plus;
        minus = next_minus;
    }
    let mut position = vec![0u32; 1 << n];
    for list in [&plus, &minus] {
        for (idx, q) in list.iter().enumerate() {
            position[q.bits() as usize] = idx as u32;
        }
    }
    Ok(ParityChainBasis {
        n,
        plus,
        minus,
        position,
    })
}

/// `(photon number, sector)` for the first `n_blocks` blocks of a chain.
pub fn chain_sequence(
    label: SubspaceLabel,
    photon_order: usize,
    n_blocks: usize,
) -> Result<Vec<(usize, Parity)>> {
    if photon_order == 0 {
        return Err(Error::InvalidParameter("photon_order must be >= 1".into()));
    }
    if n_blocks == 0 {
        return Err(Error::InvalidParameter("n_blocks must be >= 1".into()));
    }
    label.validate(photon_order)?;
    Ok((0..n_blocks)
        .map(|j| (label.photon_at(j, photon_order), label.sector_at(j)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfgs(list: &[QubitConfig]) -> Vec<String> {
        list.iter().map(|q| q.arrows()).collect()
    }

    #[test]
    fn one_qubit_basis() {
        let b = parity_chain_basis(1).unwrap();
        assert_eq!(cfgs(b.plus()), ["↑"]);
        assert_eq!(cfgs(b.minus()), ["↓"]);
    }

    #[test]
    fn two_qubit_basis() {
        let b = parity_chain_basis(2).unwrap();
        assert_eq!(cfgs(b.plus()), ["↓↓", "↑↑"]);
        assert_eq!(cfgs(b.minus()), ["↑↓", "↓↑"]);
    }

    #[test]
    fn three_qubit_basis_follows_recursion() {
        let b = parity_chain_basis(3).unwrap();
        assert_eq!(cfgs(b.plus()), ["↑↓↓", "↓↑↓", "↓↓↑", "↑↑↑"]);
        assert_eq!(cfgs(b.minus()), ["↓↓↓", "↑↑↓", "↑↓↑", "↓↑↑"]);
    }

    #[test]
    fn zero_qubits_rejected() {
        assert!(matches!(
            parity_chain_basis(0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn bases_partition_and_carry_sign() {
        for n in 1..=8 {
            let b = parity_chain_basis(n).unwrap();
            assert_eq!(b.plus().len(), 1 << (n - 1));
            assert_eq!(b.minus().len(), 1 << (n - 1));
            let mut seen = vec![false; 1 << n];
            for (list, sign) in [(b.plus(), 1), (b.minus(), -1)] {
                for (idx, q) in list.iter().enumerate() {
                    assert_eq!(q.sigma_z_product(), sign);
                    assert!(!seen[q.bits() as usize]);
                    seen[q.bits() as usize] = true;
                    assert_eq!(b.index_of(*q), idx);
                }
            }
            assert!(seen.iter().all(|s| *s));
        }
    }

    #[test]
    fn chain_sequences() {
        let even = SubspaceLabel::new(0, Parity::Even);
        assert_eq!(
            chain_sequence(even, 1, 3).unwrap(),
            [(0, Parity::Even), (1, Parity::Odd), (2, Parity::Even)]
        );
        // The label carries the head sector, so (1,-) starts in the Πσz = -1 sector.
        let odd1 = SubspaceLabel::new(1, Parity::Odd);
        assert_eq!(
            chain_sequence(odd1, 2, 3).unwrap(),
            [(1, Parity::Odd), (3, Parity::Even), (5, Parity::Odd)]
        );
        assert_eq!(
            chain_sequence(even, 3, 2).unwrap(),
            [(0, Parity::Even), (3, Parity::Odd)]
        );
        assert!(chain_sequence(SubspaceLabel::new(2, Parity::Even), 2, 3).is_err());
    }

    #[test]
    fn conserved_sign_along_chain() {
        for m in 1..=4 {
            let params = ModelParams::new(3, m, 1.0, vec![0.0; 3], vec![0.0; 3]).unwrap();
            for label in params.subspaces() {
                let basis = parity_chain_basis(3).unwrap();
                for (n, sector) in chain_sequence(label, m, 6).unwrap() {
                    for q in basis.sector(sector) {
                        let block = label.block_of(n, m).unwrap();
                        let sign = if block % 2 == 0 { 1 } else { -1 } * q.sigma_z_product();
                        assert_eq!(sign, label.parity.sign());
                        if m == 1 {
                            let r = if n % 2 == 0 { 1 } else { -1 } * q.sigma_z_product();
                            assert_eq!(r, label.parity.sign());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn params_json_rejects_unknown_keys() {
        let good = r#"{"n_qubits":2,"photon_order":1,"omega":1.0,"couplings":[0.1,0.1],"splittings":[0.6,0.4]}"#;
        let p: ModelParams = serde_json::from_str(good).unwrap();
        p.validate().unwrap();
        let bad = r#"{"n_qubits":2,"photon_order":1,"omega":1.0,"couplings":[0.1,0.1],"splittings":[0.6,0.4],"extra":1}"#;
        assert!(serde_json::from_str::<ModelParams>(bad).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(2, 1, 1.0, vec![0.1], vec![0.0, 0.0]).is_err());
        assert!(ModelParams::new(2, 1, 0.0, vec![0.1, 0.1], vec![0.0, 0.0]).is_err());
        assert!(ModelParams::new(2, 1, 1.0, vec![-0.1, 0.1], vec![0.0, 0.0]).is_err());
        assert!(ModelParams::new(2, 0, 1.0, vec![0.1, 0.1], vec![0.0, 0.0]).is_err());
        assert!(ModelParams::new(2, 2, 2.0, vec![0.1, 0.1], vec![0.0, 0.0]).is_ok());
    }

    #[test]
    fn config_parse_and_display() {
        let q = QubitConfig::parse("udd").unwrap();
        assert_eq!(q.to_string(), "udd");
        assert_eq!(q.arrows(), "↑↓↓");
        assert_eq!(q.sigma_z_product(), 1);
        assert!(QubitConfig::parse("uxd").is_err());
    }
}
