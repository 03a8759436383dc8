// SPDX-License-Identifier: Apache-2.0

//! Numerical search for states confined to the first two blocks of a chain.
//!
//! With `c_1 = Z u` restricted to the zero modes of `O_N`, the chain rows that
//! remain are
//!
//! ```text
//! (D_0 - E) c_0                 = 0
//! w_0 O_N c_0 + (D_1 - E) Z u   = 0
//! ```
//!
//! and a state exists at `E` exactly when this stacked matrix has a null space.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::state::DarkLikeState;
use super::verify::verify_state;
use crate::blocks::{diag_block, offdiag_factor};
use crate::error::{Error, Result};
use crate::model::{parity_chain_basis, ModelParams, SubspaceLabel};
use crate::omatrix::{coupling_matrix, zero_modes, ZERO_MODE_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanOptions {
    /// Energy window in physical units, inclusive.
    pub window: (f64, f64),
    pub grid_points: usize,
    /// Accept when `σ_min < tol · σ_max`.
    pub tol: f64,
    /// Golden-section stopping width in units of `ω`.
    pub refine_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            window: (0.0, 3.0),
            grid_points: 601,
            tol: 1e-9,
            refine_tol: 1e-12,
        }
    }
}

impl ScanOptions {
    pub fn with_window(lo: f64, hi: f64) -> Self {
        ScanOptions {
            window: (lo, hi),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanState {
    pub state: DarkLikeState,
    /// Energy at which the null space was found.
    pub scan_energy: f64,
    /// `σ_min / σ_max` at `scan_energy`.
    pub ratio: f64,
    /// Dimension of the null space this state belongs to.
    pub degeneracy: usize,
    /// `‖Hψ − Eψ‖ / ‖ψ‖` on a three-block chain.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanOutcome {
    pub label: SubspaceLabel,
    pub zero_mode_dim: usize,
    pub states: Vec<ScanState>,
    /// `(energy, ratio)` pairs with `tol ≤ ratio ≤ 100 tol`.
    pub inconclusive: Vec<(f64, f64)>,
}

impl ScanOutcome {
    pub fn dark_states(&self) -> Vec<&DarkLikeState> {
        self.states.iter().map(|s| &s.state).collect()
    }
}

struct System {
    d0: Vec<f64>,
    d1: Vec<f64>,
    coupling: DMatrix<f64>,
    z: DMatrix<f64>,
}

impl System {
    fn matrix(&self, e: f64) -> DMatrix<f64> {
        let b = self.d0.len();
        let d = self.z.ncols();
        let mut a = DMatrix::zeros(2 * b, b + d);
        for k in 0..b {
            a[(k, k)] = self.d0[k] - e;
        }
        a.view_mut((b, 0), (b, b)).copy_from(&self.coupling);
        let mut dz = self.z.clone();
        for (k, mut row) in dz.row_iter_mut().enumerate() {
            row *= self.d1[k] - e;
        }
        a.view_mut((b, b), (b, d)).copy_from(&dz);
        a
    }

    /// Singular values ascending with the matching right singular vectors.
    fn decompose(&self, e: f64) -> (Vec<f64>, DMatrix<f64>) {
        let svd = self.matrix(e).svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
        let values = order.iter().map(|&k| svd.singular_values[k]).collect();
        let mut rows = DMatrix::zeros(order.len(), v_t.ncols());
        for (r, &k) in order.iter().enumerate() {
            rows.set_row(r, &v_t.row(k));
        }
        (values, rows)
    }

    fn ratio(&self, e: f64) -> f64 {
        let (s, _) = self.decompose(e);
        let max = *s.last().expect("non-empty");
        if max == 0.0 {
            0.0
        } else {
            s[0] / max
        }
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Scans chain `label` for states with photon support `{i, i + M}`.
///
/// Returns no states when `O_N` has no zero modes.
pub fn generic_scan(
    params: &ModelParams,
    label: SubspaceLabel,
    opts: &ScanOptions,
) -> Result<ScanOutcome> {
    params.validate()?;
    let m = params.photon_order;
    label.validate(m)?;
    let (lo, hi) = opts.window;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidParameter(format!(
            "energy window [{lo}, {hi}] is not a finite interval"
        )));
    }
    if opts.grid_points < 2 || !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::InvalidParameter(
            "scan needs at least two grid points and a positive tolerance".into(),
        ));
    }
    let n = params.n_qubits;
    let omega = params.omega;
    let reduced = params.reduced();
    let modes = zero_modes(n, &reduced.couplings, ZERO_MODE_TOL)?;
    let mut outcome = ScanOutcome {
        label,
        zero_mode_dim: modes.dim(),
        states: Vec::new(),
        inconclusive: Vec::new(),
    };
    if modes.is_empty() {
        return Ok(outcome);
    }
    let b = reduced.block_dim();
    let w0 = offdiag_factor(m, label.initial, 0)?;
    let sys = System {
        d0: diag_block(&reduced, label, 0)?,
        d1: diag_block(&reduced, label, 1)?,
        coupling: coupling_matrix(n, &reduced.couplings)? * w0,
        z: modes.as_matrix(b),
    };
    let (rlo, rhi) = (lo / omega, hi / omega);
    let inside = |e: f64| e >= rlo - 1e-12 && e <= rhi + 1e-12;

    // Exact solutions need E on the block-0 diagonal or, with c_0 = 0, on
    // the block-1 diagonal.
    let mut candidates: Vec<f64> = sys
        .d0
        .iter()
        .chain(sys.d1.iter())
        .copied()
        .chain(std::iter::once((label.initial + m) as f64))
        .filter(|e| inside(*e))
        .collect();

    let step = (rhi - rlo) / (opts.grid_points - 1) as f64;
    let grid: Vec<f64> = (0..opts.grid_points)
        .map(|k| rlo + step * k as f64)
        .collect();
    let values: Vec<f64> = grid.par_iter().map(|&e| sys.ratio(e)).collect();
    if step > 0.0 {
        for k in 0..grid.len() {
            let left = if k == 0 { f64::INFINITY } else { values[k - 1] };
            let right = values.get(k + 1).copied().unwrap_or(f64::INFINITY);
            if values[k] <= left && values[k] < right {
                let a = (grid[k] - step).max(rlo);
                let c = (grid[k] + step).min(rhi);
                candidates.push(golden_section(|e| sys.ratio(e), a, c, opts.refine_tol));
            }
        }
    }

    // Privileged candidates are listed first and survive deduplication.
    let mut unique: Vec<f64> = Vec::new();
    for e in candidates {
        if !unique.iter().any(|u| (u - e).abs() < 1e-9) {
            unique.push(e);
        }
    }
    unique.sort_by(f64::total_cmp);

    let hits: Vec<(f64, Vec<f64>, DMatrix<f64>)> = unique
        .par_iter()
        .map(|&e| {
            let (s, v) = sys.decompose(e);
            (e, s, v)
        })
        .collect();

    let basis = parity_chain_basis(n)?;
    let head = basis.sector(label.sector_at(0));
    let tail = basis.sector(label.sector_at(1));
    let i0 = label.initial;
    for (e, s, v) in hits {
        let max = s.last().copied().unwrap_or(0.0);
        let rel: Vec<f64> = s
            .iter()
            .map(|x| if max == 0.0 { 0.0 } else { x / max })
            .collect();
        let null: Vec<usize> = (0..rel.len()).filter(|&k| rel[k] < opts.tol).collect();
        if null.is_empty() {
            if rel[0] <= 100.0 * opts.tol {
                outcome.inconclusive.push((e * omega, rel[0]));
            }
            continue;
        }
        for &k in &null {
            let x = v.row(k).transpose();
            let c0 = x.rows(0, b).into_owned();
            let c1 = &sys.z * x.rows(b, sys.z.ncols());
            let scale = c0
                .iter()
                .chain(c1.iter())
                .fold(0.0f64, |a, v| a.max(v.abs()));
            let cut = 1e-13 * scale;
            let terms = head
                .iter()
                .zip(c0.iter())
                .map(|(q, v)| (i0, *q, *v))
                .chain(tail.iter().zip(c1.iter()).map(|(q, v)| (i0 + m, *q, *v)))
                .filter(|(_, _, v)| v.abs() > cut);
            let raw = DarkLikeState::from_terms(label, n, e * omega, "scan", terms)?;
            let mut state = raw.normalized_view();
            let report = verify_state(params, &state, f64::INFINITY)?;
            state.energy = report.measured_energy;
            let residual = verify_state(params, &state, f64::INFINITY)?.residual;
            outcome.states.push(ScanState {
                state,
                scan_energy: e * omega,
                ratio: rel[k],
                degeneracy: null.len(),
                residual,
            });
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darksolver::catalog::{build_state, catalog_match, CATALOG_TOL};
    use crate::model::Parity;

    #[test]
    fn finds_two_qubit_even_state() {
        let p = ModelParams::single_photon(vec![0.25, 0.25], vec![0.6, 0.4]).unwrap();
        let label = SubspaceLabel::new(0, Parity::Even);
        let out = generic_scan(&p, label, &ScanOptions::default()).unwrap();
        assert_eq!(out.zero_mode_dim, 1);
        assert_eq!(out.states.len(), 1, "{out:?}");
        let s = &out.states[0];
        assert!((s.state.energy - 1.0).abs() < 1e-12);
        assert!(s.residual < 1e-12);
        let c = &catalog_match(&p, CATALOG_TOL).unwrap()[0];
        let want = &build_state(c, &p).unwrap()[0];
        assert!((s.state.overlap(want).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finds_three_qubit_state() {
        let p = ModelParams::single_photon(vec![1.5, 1.0, 0.5], vec![1.0; 3]).unwrap();
        let label = SubspaceLabel::new(0, Parity::Odd);
        let out = generic_scan(&p, label, &ScanOptions::default()).unwrap();
        let at_one: Vec<_> = out
            .states
            .iter()
            .filter(|s| (s.state.energy - 1.0).abs() < 1e-9)
            .collect();
        assert_eq!(at_one.len(), 1);
        let c = &catalog_match(&p, CATALOG_TOL).unwrap()[0];
        let want = &build_state(c, &p).unwrap()[0];
        assert!((at_one[0].state.overlap(want).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_zero_mode_gives_empty() {
        let p = ModelParams::single_photon(vec![0.3, 0.2], vec![0.6, 0.4]).unwrap();
        for label in p.subspaces() {
            let out = generic_scan(&p, label, &ScanOptions::default()).unwrap();
            assert_eq!(out.zero_mode_dim, 0);
            assert!(out.states.is_empty());
        }
    }

    #[test]
    fn generic_equal_couplings_find_nothing_in_even_chain() {
        let p = ModelParams::single_photon(vec![0.3, 0.3], vec![0.7, 0.45]).unwrap();
        let out = generic_scan(
            &p,
            SubspaceLabel::new(0, Parity::Even),
            &ScanOptions::default(),
        )
        .unwrap();
        assert_eq!(out.zero_mode_dim, 1);
        assert!(out.states.is_empty(), "{out:?}");
    }

    #[test]
    fn golden_section_minimum() {
        let x = golden_section(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-11);
    }
}
