// SPDX-License-Identifier: Apache-2.0

//! Truncated chain spectra, stability gating, coupling sweeps and detection
//! of coupling-independent levels.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{assemble_chain, blocks_for_cutoff, BlockChain};
use crate::error::{Error, Result};
use crate::model::{ModelParams, SubspaceLabel};

pub const CONVERGENCE_TOL: f64 = 1e-9;
pub const LINE_TOL: f64 = 1e-7;
pub const STABILITY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StabilityRegime {
    AlwaysStable,
    Stable,
    AtThreshold,
    Unstable,
    NeverConvergent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub regime: StabilityRegime,
    pub photon_order: usize,
    /// `Σ_k g_k`.
    pub lambda_max: f64,
    /// `ω / 2`.
    pub threshold: f64,
    pub epsilon: f64,
}

impl StabilityReport {
    /// Whether truncated spectra are expected to converge.
    pub fn is_convergent(&self) -> bool {
        matches!(
            self.regime,
            StabilityRegime::AlwaysStable | StabilityRegime::Stable
        )
    }
}

pub fn stability_check(params: &ModelParams) -> StabilityReport {
    stability_check_eps(params, STABILITY_EPS)
}

/// Classifies the model; `eps` is absolute in units of `ω`.
pub fn stability_check_eps(params: &ModelParams, eps: f64) -> StabilityReport {
    let lambda_max = params.coupling_sum();
    let threshold = 0.5 * params.omega;
    let x = lambda_max / params.omega;
    let regime = match params.photon_order {
        1 => StabilityRegime::AlwaysStable,
        2 if x >= 0.5 => StabilityRegime::Unstable,
        2 if x >= 0.5 - eps => StabilityRegime::AtThreshold,
        2 => StabilityRegime::Stable,
        _ if lambda_max == 0.0 => StabilityRegime::Stable,
        _ => StabilityRegime::NeverConvergent,
    };
    StabilityReport {
        regime,
        photon_order: params.photon_order,
        lambda_max,
        threshold,
        epsilon: eps,
    }
}

/// Lowest levels of one chain with truncation-doubling convergence flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSpectrum {
    pub label: SubspaceLabel,
    pub blocks: usize,
    pub doubled_blocks: usize,
    /// Ascending, taken from the doubled truncation.
    pub eigenvalues: Vec<f64>,
    pub converged: Vec<bool>,
}

impl ChainSpectrum {
    pub fn converged_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.eigenvalues
            .iter()
            .zip(&self.converged)
            .filter(|(_, c)| **c)
            .map(|(e, _)| *e)
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|c| *c)
    }

    /// Distance from `v` to the closest eigenvalue.
    pub fn nearest(&self, v: f64) -> f64 {
        nearest_distance(&self.eigenvalues, v)
    }
}

/// Distance from `v` to the closest entry of the ascending slice `sorted`.
fn nearest_distance(sorted: &[f64], v: f64) -> f64 {
    let k = sorted.partition_point(|x| *x < v);
    [k.checked_sub(1), Some(k)]
        .into_iter()
        .flatten()
        .filter_map(|j| sorted.get(j))
        .map(|x| (x - v).abs())
        .fold(f64::INFINITY, f64::min)
}

pub fn diagonalize_chain(chain: &BlockChain, levels: usize) -> Result<ChainSpectrum> {
    diagonalize_chain_with_tol(chain, levels, CONVERGENCE_TOL)
}

pub fn diagonalize_chain_with_tol(
    chain: &BlockChain,
    levels: usize,
    tol: f64,
) -> Result<ChainSpectrum> {
    if levels == 0 || levels > chain.dim() {
        return Err(Error::InvalidParameter(format!(
            "levels must be in 1..={}, got {levels}",
            chain.dim()
        )));
    }
    let doubled = chain.resized(2 * chain.n_blocks)?;
    let coarse = chain.eigenvalues();
    let mut fine = doubled.eigenvalues();
    fine.truncate(levels);
    let converged = fine
        .iter()
        .map(|f| nearest_distance(&coarse, *f) < tol)
        .collect();
    Ok(ChainSpectrum {
        label: chain.label,
        blocks: chain.n_blocks,
        doubled_blocks: doubled.n_blocks,
        eigenvalues: fine,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOptions {
    pub blocks: usize,
    pub levels: usize,
    pub convergence_tol: f64,
    pub stability_eps: f64,
    pub allow_unstable: bool,
    pub require_converged: bool,
    /// Restrict to these chains; all `2M` when `None`.
    pub subspaces: Option<Vec<SubspaceLabel>>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            blocks: 40,
            levels: 20,
            convergence_tol: CONVERGENCE_TOL,
            stability_eps: STABILITY_EPS,
            allow_unstable: false,
            require_converged: false,
            subspaces: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub s: f64,
    pub stability: StabilityReport,
    /// One entry per swept chain, in chain order.
    pub spectra: Vec<ChainSpectrum>,
}

impl SweepPoint {
    pub fn spectrum(&self, label: SubspaceLabel) -> Option<&ChainSpectrum> {
        self.spectra.iter().find(|c| c.label == label)
    }
}

/// A grid point skipped by the stability gate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityCut {
    pub s: f64,
    pub stability: StabilityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSweep {
    pub base: ModelParams,
    pub grid: Vec<f64>,
    pub blocks: usize,
    pub doubled_blocks: usize,
    pub levels: usize,
    pub subspaces: Vec<SubspaceLabel>,
    pub points: Vec<SweepPoint>,
    pub cuts: Vec<StabilityCut>,
}

/// `steps` evenly spaced values from `s_min` to `s_max`.
pub fn scale_grid(s_min: f64, s_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "a sweep needs at least 2 steps, got {steps}"
        )));
    }
    if !(s_min.is_finite() && s_max.is_finite() && s_min >= 0.0 && s_max > s_min) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= s_min < s_max, got [{s_min}, {s_max}]"
        )));
    }
    let span = s_max - s_min;
    let last = (steps - 1) as f64;
    Ok((0..steps).map(|k| s_min + span * k as f64 / last).collect())
}

/// Diagonalizes every chain at couplings `s · g_base` for `s` on the grid.
pub fn sweep(
    base: &ModelParams,
    s_min: f64,
    s_max: f64,
    steps: usize,
    opts: &SweepOptions,
) -> Result<SpectrumSweep> {
    base.validate()?;
    let grid = scale_grid(s_min, s_max, steps)?;
    if opts.blocks == 0 {
        return Err(Error::InvalidParameter("blocks must be >= 1".into()));
    }
    let subspaces = match &opts.subspaces {
        Some(s) => {
            for l in s {
                l.validate(base.photon_order)?;
            }
            s.clone()
        }
        None => base.subspaces(),
    };
    let max_levels = opts.blocks * base.block_dim();
    if opts.levels == 0 || opts.levels > max_levels {
        return Err(Error::InvalidParameter(format!(
            "levels must be in 1..={max_levels}, got {}",
            opts.levels
        )));
    }

    let mut kept = Vec::new();
    let mut cuts = Vec::new();
    for &s in &grid {
        let p = base.with_coupling_scale(s);
        let stability = stability_check_eps(&p, opts.stability_eps);
        let refused = matches!(
            stability.regime,
            StabilityRegime::Unstable | StabilityRegime::AtThreshold
        ) && !opts.allow_unstable;
        if refused {
            if opts.require_converged {
                return Err(Error::Stability(format!(
                    "s = {s}: Σg = {} is not below ω/2 = {}",
                    stability.lambda_max, stability.threshold
                )));
            }
            cuts.push(StabilityCut { s, stability });
        } else {
            kept.push((s, p, stability));
        }
    }

    let tasks: Vec<(usize, SubspaceLabel)> = (0..kept.len())
        .flat_map(|k| subspaces.iter().map(move |l| (k, *l)))
        .collect();
    let spectra: Vec<ChainSpectrum> = tasks
        .par_iter()
        .map(|(k, label)| {
            let chain = assemble_chain(&kept[*k].1, *label, opts.blocks)?;
            diagonalize_chain_with_tol(&chain, opts.levels, opts.convergence_tol)
        })
        .collect::<Result<_>>()?;

    let mut it = spectra.into_iter();
    let points: Vec<SweepPoint> = kept
        .into_iter()
        .map(|(s, _, stability)| SweepPoint {
            s,
            stability,
            spectra: it.by_ref().take(subspaces.len()).collect(),
        })
        .collect();

    if opts.require_converged {
        for pt in &points {
            if let Some(c) = pt.spectra.iter().find(|c| !c.all_converged()) {
                return Err(Error::NotConverged(format!(
                    "s = {}: chain {} has levels that move by more than {} between {} and {} blocks",
                    pt.s, c.label, opts.convergence_tol, c.blocks, c.doubled_blocks
                )));
            }
        }
    }

    Ok(SpectrumSweep {
        base: base.clone(),
        grid,
        blocks: opts.blocks,
        doubled_blocks: 2 * opts.blocks,
        levels: opts.levels,
        subspaces,
        points,
        cuts,
    })
}

impl SpectrumSweep {
    /// `s,i,parity,index,energy,converged`, one row per level.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,i,parity,index,energy,converged\n");
        for pt in &self.points {
            for c in &pt.spectra {
                for (k, (e, ok)) in c.eigenvalues.iter().zip(&c.converged).enumerate() {
                    writeln!(
                        out,
                        "{},{},{},{},{:.11e},{}",
                        pt.s,
                        c.label.initial,
                        c.label.parity.symbol(),
                        k,
                        e,
                        ok
                    )
                    .expect("writing to a String");
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizontalLine {
    pub value: f64,
    pub label: SubspaceLabel,
    /// Largest nearest-eigenvalue distance over the grid.
    pub max_deviation: f64,
    /// Eigenvalues within tolerance of `value` at each grid point.
    pub multiplicity: Vec<usize>,
}

/// Levels present at every grid point of a chain, within `tol`.
pub fn detect_horizontal(sweep: &SpectrumSweep, tol: f64) -> Vec<HorizontalLine> {
    let pts = &sweep.points;
    let seed_idx = match pts.first() {
        None => return Vec::new(),
        Some(p) if p.s == 0.0 && pts.len() > 1 => 1,
        Some(_) => 0,
    };
    let mut lines = Vec::new();
    for label in &sweep.subspaces {
        let Some(seed) = pts[seed_idx].spectrum(*label) else {
            continue;
        };
        let mut seeds: Vec<f64> = Vec::new();
        for v in seed.converged_values() {
            if !seeds.iter().any(|u| (u - v).abs() <= tol) {
                seeds.push(v);
            }
        }
        for v in seeds {
            let mut max_deviation = 0.0f64;
            let mut multiplicity = Vec::with_capacity(pts.len());
            let mut ok = true;
            for pt in pts {
                let Some(c) = pt.spectrum(*label) else {
                    ok = false;
                    break;
                };
                let d = c.nearest(v);
                if d > tol {
                    ok = false;
                    break;
                }
                max_deviation = max_deviation.max(d);
                multiplicity.push(
                    c.eigenvalues
                        .iter()
                        .filter(|e| (*e - v).abs() <= tol)
                        .count(),
                );
            }
            if ok {
                lines.push(HorizontalLine {
                    value: v,
                    label: *label,
                    max_deviation,
                    multiplicity,
                });
            }
        }
    }
    lines
}

/// Sorted union of all chain spectra truncated at photon number `cutoff`.
pub fn chain_union_spectrum(params: &ModelParams, cutoff: usize) -> Result<Vec<f64>> {
    params.validate()?;
    let mut all = Vec::new();
    for label in params.subspaces() {
        let b = blocks_for_cutoff(label, params.photon_order, cutoff);
        if b > 0 {
            all.extend(assemble_chain(params, label, b)?.eigenvalues());
        }
    }
    all.sort_by(f64::total_cmp);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::dense_oracle;
    use crate::model::Parity;

    #[test]
    fn stability_examples() {
        let m2 = |g: f64| ModelParams::new(2, 2, 1.0, vec![g, g], vec![0.0, 0.0]).unwrap();
        assert_eq!(stability_check(&m2(0.2)).regime, StabilityRegime::Stable);
        assert_eq!(stability_check(&m2(0.3)).regime, StabilityRegime::Unstable);
        assert_eq!(stability_check(&m2(0.25)).regime, StabilityRegime::Unstable);
        assert_eq!(
            stability_check(&m2(0.25 - 1e-14)).regime,
            StabilityRegime::AtThreshold
        );
        let r = stability_check(&m2(0.2));
        assert_eq!(r.threshold, 0.5);
        assert!((r.lambda_max - 0.4).abs() < 1e-15);
        let m1 = ModelParams::single_photon(vec![5.0], vec![0.1]).unwrap();
        assert_eq!(stability_check(&m1).regime, StabilityRegime::AlwaysStable);
        let m3 = ModelParams::new(1, 3, 1.0, vec![1e-6], vec![0.1]).unwrap();
        assert_eq!(
            stability_check(&m3).regime,
            StabilityRegime::NeverConvergent
        );
    }

    #[test]
    fn decoupled_chain_levels() {
        let p = ModelParams::single_photon(vec![0.0], vec![0.3]).unwrap();
        let chain = assemble_chain(&p, SubspaceLabel::new(0, Parity::Even), 3).unwrap();
        let s = diagonalize_chain(&chain, 3).unwrap();
        let want = [0.3, 0.7, 2.3];
        for (e, w) in s.eigenvalues.iter().zip(want) {
            assert!((e - w).abs() < 1e-14);
        }
        assert!(s.all_converged());
        assert_eq!(s.doubled_blocks, 6);
        assert!(diagonalize_chain(&chain, 4).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(scale_grid(0.5, 0.5, 10).is_err());
        assert!(scale_grid(0.0, 1.0, 1).is_err());
        let g = scale_grid(0.0, 1.0, 11).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[10], 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn decoupled_sweep_every_level_is_a_line() {
        let p = ModelParams::single_photon(vec![0.0, 0.0], vec![0.3, 0.1]).unwrap();
        let opts = SweepOptions {
            blocks: 6,
            levels: 5,
            ..SweepOptions::default()
        };
        let sw = sweep(&p, 0.0, 1.0, 4, &opts).unwrap();
        let lines = detect_horizontal(&sw, LINE_TOL);
        for label in &sw.subspaces {
            let distinct = {
                let mut v: Vec<f64> = sw.points[0].spectrum(*label).unwrap().eigenvalues.clone();
                v.dedup_by(|a, b| (*a - *b).abs() <= LINE_TOL);
                v.len()
            };
            assert_eq!(lines.iter().filter(|l| l.label == *label).count(), distinct);
        }
    }

    #[test]
    fn unstable_points_are_cut() {
        let p = ModelParams::new(2, 2, 1.0, vec![0.5, 0.5], vec![1.6, 0.4]).unwrap();
        let opts = SweepOptions {
            blocks: 10,
            levels: 4,
            ..SweepOptions::default()
        };
        let sw = sweep(&p, 0.0, 0.8, 9, &opts).unwrap();
        assert_eq!(sw.points.len(), 5);
        assert_eq!(sw.cuts.len(), 4);
        assert!(sw
            .cuts
            .iter()
            .all(|c| c.stability.regime == StabilityRegime::Unstable));
        let strict = SweepOptions {
            require_converged: true,
            ..opts.clone()
        };
        assert!(matches!(
            sweep(&p, 0.0, 0.8, 9, &strict),
            Err(Error::Stability(_))
        ));
        let loose = SweepOptions {
            allow_unstable: true,
            ..opts
        };
        assert_eq!(sweep(&p, 0.0, 0.8, 9, &loose).unwrap().points.len(), 9);
    }

    #[test]
    fn csv_shape() {
        let p = ModelParams::single_photon(vec![0.2], vec![0.3]).unwrap();
        let opts = SweepOptions {
            blocks: 4,
            levels: 2,
            ..SweepOptions::default()
        };
        let csv = sweep(&p, 0.0, 1.0, 2, &opts).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "s,i,parity,index,energy,converged");
        assert_eq!(lines.len(), 1 + 2 * 2 * 2);
        assert_eq!(lines[1], "0,0,+,0,3.00000000000e-1,true");
    }

    #[test]
    fn union_matches_oracle() {
        let p = ModelParams::new(3, 3, 1.0, vec![0.1, 0.05, 0.2], vec![0.3, 0.7, -0.4]).unwrap();
        let u = chain_union_spectrum(&p, 8).unwrap();
        let o = dense_oracle(&p, 8).unwrap().eigenvalues();
        assert_eq!(u.len(), o.len());
        for (a, b) in u.iter().zip(&o) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
