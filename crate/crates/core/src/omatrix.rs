// SPDX-License-Identifier: Apache-2.0

//! The coupling core `O_N` and its closed-form eigen-structure.
//!
//! `O_N = [[O_{N-1}, g_N I], [g_N I, O_{N-1}]]` with `O_1 = g_1`. Its
//! eigenvalues are the sign-pattern sums `g_1 ± g_2 ± ... ± g_N`, each with a
//! ±1 eigenvector built by the same recursion: `(v, v)` for `+g_N` and
//! `(v, -v)` for `-g_N`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for zero-mode detection.
pub const ZERO_MODE_TOL: f64 = 1e-12;

/// Signs `(+1, s_2, ..., s_N)` of one eigenvalue `g_1 + s_2 g_2 + ... + s_N g_N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignPattern {
    signs: Vec<i8>,
}

impl SignPattern {
    /// Pattern whose `k`-th sign (k ≥ 2) is negative iff bit `k - 2` of `mask` is set.
    pub fn from_mask(n: usize, mask: usize) -> Self {
        let signs = (0..n)
            .map(|k| {
                if k > 0 && (mask >> (k - 1)) & 1 == 1 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        SignPattern { signs }
    }

    pub fn from_signs(signs: Vec<i8>) -> Result<Self> {
        if signs.first() != Some(&1) || signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidParameter(
                "sign pattern must start with + and contain only ±1".into(),
            ));
        }
        Ok(SignPattern { signs })
    }

    /// Parses `"+--+"`; the first sign must be `+`.
    pub fn parse(s: &str) -> Result<Self> {
        let signs = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(Error::InvalidParameter(format!("bad sign {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_signs(signs)
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// `g_1 + (s_2 g_2 + ... + s_N g_N)`, tail summed first so that
    /// [`SignPattern::snap`] yields an exact zero.
    pub fn value(&self, g: &[f64]) -> f64 {
        g[0] + self.tail(g)
    }

    fn tail(&self, g: &[f64]) -> f64 {
        self.signs[1..]
            .iter()
            .zip(&g[1..])
            .map(|(s, g)| f64::from(*s) * g)
            .sum()
    }

    /// ±1 eigenvector of `O_N` for this pattern, in recursion order.
    pub fn vector(&self) -> DVector<f64> {
        let n = self.signs.len();
        let dim = 1usize << (n - 1);
        DVector::from_fn(dim, |r, _| {
            let mut v = 1.0;
            for k in 1..n {
                if (r >> (k - 1)) & 1 == 1 {
                    v *= f64::from(self.signs[k]);
                }
            }
            v
        })
    }

    /// Human-readable sum such as `g1-g2+g3`.
    pub fn expression(&self) -> String {
        let mut out = String::new();
        for (k, s) in self.signs.iter().enumerate() {
            if k > 0 {
                out.push(if *s > 0 { '+' } else { '-' });
            }
            out.push_str(&format!("g{}", k + 1));
        }
        out
    }

    /// Adjusts `g_1` so that the pattern sum is exactly zero.
    ///
    /// Fails when the required `g_1` would be negative.
    pub fn snap(&self, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.signs.len() {
            return Err(Error::InvalidParameter(format!(
                "pattern has {} signs but there are {} couplings",
                self.signs.len(),
                g.len()
            )));
        }
        let g1 = -self.tail(g);
        if g1 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "snapping {} needs g1 = {g1} < 0",
                self.expression()
            )));
        }
        let mut out = g.to_vec();
        out[0] = g1;
        Ok(out)
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.signs {
            f.write_str(if *s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Null space of `O_N` spanned by sign-pattern vectors with zero value.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroModeBasis {
    pub patterns: Vec<SignPattern>,
    /// Unit-norm vectors, one per pattern.
    pub vectors: Vec<DVector<f64>>,
}

impl ZeroModeBasis {
    pub fn dim(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Vectors as the columns of a `2^{N-1} × d` matrix.
    pub fn as_matrix(&self, block_dim: usize) -> DMatrix<f64> {
        let mut z = DMatrix::zeros(block_dim, self.vectors.len());
        for (c, v) in self.vectors.iter().enumerate() {
            z.set_column(c, v);
        }
        z
    }
}

fn check_couplings(n: usize, g: &[f64]) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    if g.len() != n {
        return Err(Error::InvalidParameter(format!(
            "expected {n} couplings, got {}",
            g.len()
        )));
    }
    Ok(())
}

/// `O_N` by the block recursion.
pub fn coupling_matrix(n: usize, g: &[f64]) -> Result<DMatrix<f64>> {
    check_couplings(n, g)?;
    let mut o = DMatrix::from_element(1, 1, g[0]);
    for gk in &g[1..] {
        let d = o.nrows();
        let mut next = DMatrix::zeros(2 * d, 2 * d);
        next.view_mut((0, 0), (d, d)).copy_from(&o);
        next.view_mut((d, d), (d, d)).copy_from(&o);
        for r in 0..d {
            next[(r, d + r)] = *gk;
            next[(d + r, r)] = *gk;
        }
        o = next;
    }
    Ok(o)
}

/// All `2^{N-1}` eigenpairs `(g_1 ± ... ± g_N, ±1-vector)`.
pub fn sign_pattern_eigs(n: usize, g: &[f64]) -> Result<Vec<(SignPattern, f64, DVector<f64>)>> {
    check_couplings(n, g)?;
    Ok((0..1usize << (n - 1))
        .map(|mask| {
            let p = SignPattern::from_mask(n, mask);
            let e = p.value(g);
            let v = p.vector();
            (p, e, v)
        })
        .collect())
}

/// Patterns with `|value| ≤ tol · max(1, Σ|g_k|)` and their normalized vectors.
pub fn zero_modes(n: usize, g: &[f64], tol: f64) -> Result<ZeroModeBasis> {
    check_couplings(n, g)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    let scale = g.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
    let norm = ((1usize << (n - 1)) as f64).sqrt();
    let mut patterns = Vec::new();
    let mut vectors = Vec::new();
    for (p, e, v) in sign_pattern_eigs(n, g)? {
        if e.abs() <= tol * scale {
            patterns.push(p);
            vectors.push(v / norm);
        }
    }
    Ok(ZeroModeBasis { patterns, vectors })
}
