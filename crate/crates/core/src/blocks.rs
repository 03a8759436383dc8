// SPDX-License-Identifier: Apache-2.0

//! Block-tridiagonal chain Hamiltonians and the dense tensor-product oracle.
//!
//! In units of `ω`, block `j` of chain `(i, p)` holds photon number
//! `n_j = i + jM` in sector `p·(-1)^j`. Its diagonal is `n_j + Σ_k Δ_k z_k`
//! and the coupling to block `j + 1` is `w_j O_N` with
//! `w_j = sqrt((n_j + 1)(n_j + 2)···(n_j + M))`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{parity_chain_basis, ModelParams, Parity, ParityChainBasis, SubspaceLabel};
use crate::omatrix::coupling_matrix;

/// Default cap on the dense oracle dimension `2^N (cutoff + 1)`.
pub const DEFAULT_DENSE_CAP: usize = 20_000;

/// `sqrt((i+jM+1)···(i+(j+1)M))` as a running product.
pub fn offdiag_factor(photon_order: usize, initial: usize, block: usize) -> Result<f64> {
    if photon_order == 0 {
        return Err(Error::InvalidParameter("photon_order must be >= 1".into()));
    }
    let base = initial + block * photon_order;
    let mut prod = 1.0f64;
    for t in 1..=photon_order {
        prod *= (base + t) as f64;
        if !prod.is_finite() {
            return Err(Error::Overflow {
                photon_order,
                initial,
                block,
            });
        }
    }
    Ok(prod.sqrt())
}

/// Diagonal of block `j` in units of `ω`, indexed like the block's sector list.
pub fn diag_block(params: &ModelParams, label: SubspaceLabel, j: usize) -> Result<Vec<f64>> {
    params.validate()?;
    label.validate(params.photon_order)?;
    let basis = parity_chain_basis(params.n_qubits)?;
    Ok(diag_block_with(&basis, &params.reduced(), label, j))
}

fn diag_block_with(
    basis: &ParityChainBasis,
    reduced: &ModelParams,
    label: SubspaceLabel,
    j: usize,
) -> Vec<f64> {
    let photon = label.photon_at(j, reduced.photon_order) as f64;
    basis
        .sector(label.sector_at(j))
        .iter()
        .map(|q| photon + reduced.qubit_energy(*q))
        .collect()
}

/// One invariant chain truncated to `n_blocks` blocks, in units of `ω`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockChain {
    pub label: SubspaceLabel,
    pub photon_order: usize,
    pub n_qubits: usize,
    pub block_dim: usize,
    pub n_blocks: usize,
    /// `ω` of the parameters the chain was built from.
    pub omega: f64,
    pub diag_blocks: Vec<Vec<f64>>,
    pub offdiag_factors: Vec<f64>,
    #[serde(serialize_with = "serialize_matrix")]
    pub coupling_core: DMatrix<f64>,
    /// `Σ Δ_k z_k / ω` over the head sector and the flipped sector.
    #[serde(skip)]
    sector_energies: [Vec<f64>; 2],
}

fn serialize_matrix<S: serde::Serializer>(
    m: &DMatrix<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect();
    rows.serialize(s)
}

impl BlockChain {
    pub fn dim(&self) -> usize {
        self.block_dim * self.n_blocks
    }

    pub fn photon_at(&self, j: usize) -> usize {
        self.label.photon_at(j, self.photon_order)
    }

    pub fn sector_at(&self, j: usize) -> Parity {
        self.label.sector_at(j)
    }

    /// Off-diagonal block between `j` and `j + 1`.
    pub fn offdiag_block(&self, j: usize) -> DMatrix<f64> {
        &self.coupling_core * self.offdiag_factors[j]
    }

    /// Full symmetric matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let b = self.block_dim;
        let mut h = DMatrix::zeros(self.dim(), self.dim());
        for (j, d) in self.diag_blocks.iter().enumerate() {
            for (r, x) in d.iter().enumerate() {
                h[(j * b + r, j * b + r)] = *x;
            }
        }
        for (j, w) in self.offdiag_factors.iter().enumerate() {
            for r in 0..b {
                for c in 0..b {
                    let x = w * self.coupling_core[(r, c)];
                    h[((j + 1) * b + r, j * b + c)] = x;
                    h[(j * b + c, (j + 1) * b + r)] = x;
                }
            }
        }
        h
    }

    /// `H x` without forming the dense matrix.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.dim(), "vector length does not match chain");
        let b = self.block_dim;
        let mut y = DVector::zeros(self.dim());
        for (j, d) in self.diag_blocks.iter().enumerate() {
            for (r, v) in d.iter().enumerate() {
                y[j * b + r] = v * x[j * b + r];
            }
        }
        for (j, w) in self.offdiag_factors.iter().enumerate() {
            let lo = x.rows(j * b, b);
            let hi = x.rows((j + 1) * b, b);
            let up = &self.coupling_core * hi * *w;
            let down = &self.coupling_core * lo * *w;
            let mut y_lo = y.rows_mut(j * b, b);
            y_lo += up;
            let mut y_hi = y.rows_mut((j + 1) * b, b);
            y_hi += down;
        }
        y
    }

    /// The same chain truncated to `n_blocks` blocks.
    pub fn resized(&self, n_blocks: usize) -> Result<BlockChain> {
        if n_blocks == 0 {
            return Err(Error::InvalidParameter("n_blocks must be >= 1".into()));
        }
        let diag_blocks = (0..n_blocks)
            .map(|j| {
                let n = self.photon_at(j) as f64;
                self.sector_energies[j % 2].iter().map(|e| n + e).collect()
            })
            .collect();
        let offdiag_factors = (0..n_blocks - 1)
            .map(|j| offdiag_factor(self.photon_order, self.label.initial, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockChain {
            n_blocks,
            diag_blocks,
            offdiag_factors,
            ..self.clone()
        })
    }

    /// Eigenvalues in ascending order, in the energy units of the parameters.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self
            .to_dense()
            .symmetric_eigenvalues()
            .iter()
            .map(|x| x * self.omega)
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

/// Assembles chain `label` with `n_blocks` blocks.
pub fn assemble_chain(
    params: &ModelParams,
    label: SubspaceLabel,
    n_blocks: usize,
) -> Result<BlockChain> {
    params.validate()?;
    label.validate(params.photon_order)?;
    if n_blocks == 0 {
        return Err(Error::InvalidParameter("n_blocks must be >= 1".into()));
    }
    let basis = parity_chain_basis(params.n_qubits)?;
    let reduced = params.reduced();
    let m = params.photon_order;
    let diag_blocks = (0..n_blocks)
        .map(|j| diag_block_with(&basis, &reduced, label, j))
        .collect();
    let sector_energies = [0, 1].map(|j| {
        basis
            .sector(label.sector_at(j))
            .iter()
            .map(|q| reduced.qubit_energy(*q))
            .collect()
    });
    let offdiag_factors = (0..n_blocks - 1)
        .map(|j| offdiag_factor(m, label.initial, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockChain {
        label,
        photon_order: m,
        n_qubits: params.n_qubits,
        block_dim: basis.block_dim(),
        n_blocks,
        omega: params.omega,
        diag_blocks,
        offdiag_factors,
        coupling_core: coupling_matrix(params.n_qubits, &reduced.couplings)?,
        sector_energies,
    })
}

/// Number of blocks of chain `label` whose photon numbers stay `≤ cutoff`.
pub fn blocks_for_cutoff(label: SubspaceLabel, photon_order: usize, cutoff: usize) -> usize {
    if cutoff < label.initial {
        0
    } else {
        (cutoff - label.initial) / photon_order + 1
    }
}

/// Full Hamiltonian on `2^N (cutoff + 1)` states, in units of `ω`.
///
/// Basis index is `n · 2^N + bits(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOracle {
    pub n_qubits: usize,
    pub photon_order: usize,
    pub cutoff: usize,
    pub omega: f64,
    pub matrix: DMatrix<f64>,
}

impl DenseOracle {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .map(|x| x * self.omega)
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

fn kron_all(factors: &[DMatrix<f64>]) -> DMatrix<f64> {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

/// Builds the truncated Hamiltonian from Pauli and ladder-operator tensor products.
pub fn dense_oracle(params: &ModelParams, cutoff: usize) -> Result<DenseOracle> {
    dense_oracle_capped(params, cutoff, DEFAULT_DENSE_CAP)
}

pub fn dense_oracle_capped(params: &ModelParams, cutoff: usize, cap: usize) -> Result<DenseOracle> {
    params.validate()?;
    let n = params.n_qubits;
    let m = params.photon_order;
    if cutoff < m {
        return Err(Error::InvalidParameter(format!(
            "cutoff {cutoff} must be >= photon order {m}"
        )));
    }
    let dim = (cutoff + 1)
        .checked_mul(1usize << n)
        .ok_or(Error::DimensionCap {
            dim: usize::MAX,
            cap,
        })?;
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let reduced = params.reduced();
    let nf = cutoff + 1;

    let mut a = DMatrix::<f64>::zeros(nf, nf);
    for k in 1..nf {
        a[(k - 1, k)] = (k as f64).sqrt();
    }
    let number = DMatrix::from_diagonal(&DVector::from_fn(nf, |k, _| k as f64));
    let mut a_m = DMatrix::identity(nf, nf);
    for _ in 0..m {
        a_m = &a_m * &a;
    }
    let field = &a_m + a_m.transpose();

    let id2 = DMatrix::<f64>::identity(2, 2);
    // Single-qubit basis order (↓, ↑).
    let sx = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let sz = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
    // Qubit k sits at bit k, so the most significant factor is qubit N.
    let qubit_op = |k: usize, op: &DMatrix<f64>| {
        let factors: Vec<DMatrix<f64>> = (0..n)
            .rev()
            .map(|q| if q == k { op.clone() } else { id2.clone() })
            .collect();
        kron_all(&factors)
    };
    let id_q = DMatrix::<f64>::identity(1 << n, 1 << n);
    let id_f = DMatrix::<f64>::identity(nf, nf);

    let mut h = number.kronecker(&id_q);
    for k in 0..n {
        let g = reduced.couplings[k];
        if g != 0.0 {
            h += field.kronecker(&qubit_op(k, &sx)) * g;
        }
        let d = reduced.splittings[k];
        if d != 0.0 {
            h += id_f.kronecker(&qubit_op(k, &sz)) * d;
        }
    }
    Ok(DenseOracle {
        n_qubits: n,
        photon_order: m,
        cutoff,
        omega: params.omega,
        matrix: h,
    })
}
