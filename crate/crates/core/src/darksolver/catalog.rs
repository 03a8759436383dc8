// SPDX-License-Identifier: Apache-2.0

//! Closed-form dark-like families and their existence conditions.
//!
//! Every family is a product of at most one coupled core (a qubit pair or
//! triple whose amplitudes live on the first two blocks of a chain) and spin
//! singlets on the remaining qubits. The conditions are linear relations
//! between the couplings, the splittings and `ω`; for the `M`-photon model the
//! splitting relations use `Mω` where the single-photon ones use `ω`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::state::DarkLikeState;
use crate::blocks::offdiag_factor;
use crate::error::{Error, Result};
use crate::model::{parity_chain_basis, ModelParams, Parity, QubitConfig, SubspaceLabel};
use crate::omatrix::coupling_matrix;

/// Default relative tolerance when checking family conditions.
pub const CATALOG_TOL: f64 = 1e-9;

/// Splitting relation of a coupled qubit pair `(first, second)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PairKind {
    /// `Δ_first + Δ_second = Mω`, head `|↑↑⟩`.
    Even,
    /// `Δ_first - Δ_second = Mω`, head `|↑↓⟩`.
    OddA,
    /// `Δ_second - Δ_first = Mω`, head `|↓↑⟩`.
    OddB,
}

impl PairKind {
    pub const ALL: [PairKind; 3] = [PairKind::Even, PairKind::OddA, PairKind::OddB];

    fn tag(self) -> &'static str {
        match self {
            PairKind::Even => "even",
            PairKind::OddA => "odd-a",
            PairKind::OddB => "odd-b",
        }
    }
}

/// The coupled part of a product state. Qubit indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Core {
    Pair {
        kind: PairKind,
        first: usize,
        second: usize,
    },
    /// `g_active = g_rest0 + g_rest1`, all three splittings equal to `Mω`.
    Triple { active: usize, rest: [usize; 2] },
}

/// One core (or none) times singlets on disjoint qubit pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ProductTerm {
    pub core: Option<Core>,
    pub singlets: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FamilyKind {
    TwoQubitEven,
    TwoQubitOdd,
    ThreeQubit,
    FourQubitPair,
    FourQubitDark,
    FourQubitEqualCoupling,
    NQubitProduct,
}

impl FamilyKind {
    /// Short catalog letter.
    pub fn letter(self) -> char {
        match self {
            FamilyKind::TwoQubitEven => 'a',
            FamilyKind::TwoQubitOdd => 'b',
            FamilyKind::ThreeQubit => 'c',
            FamilyKind::FourQubitPair => 'd',
            FamilyKind::FourQubitDark => 'e',
            FamilyKind::FourQubitEqualCoupling => 'f',
            FamilyKind::NQubitProduct => 'g',
        }
    }
}

/// A family of (possibly degenerate) states, one [`ProductTerm`] per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Family {
    pub kind: FamilyKind,
    pub terms: Vec<ProductTerm>,
}

/// `Σ a_k g_k + Σ b_k Δ_k + c ω = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearConstraint {
    pub couplings: Vec<f64>,
    pub splittings: Vec<f64>,
    pub omega: f64,
}

impl LinearConstraint {
    fn zero(n: usize) -> Self {
        LinearConstraint {
            couplings: vec![0.0; n],
            splittings: vec![0.0; n],
            omega: 0.0,
        }
    }

    fn terms(&self, p: &ModelParams) -> impl Iterator<Item = f64> + '_ {
        let g = p.couplings.clone();
        let d = p.splittings.clone();
        let w = p.omega;
        self.couplings
            .iter()
            .zip(g)
            .map(|(a, g)| a * g)
            .chain(self.splittings.iter().zip(d).map(|(b, d)| b * d))
            .chain(std::iter::once(self.omega * w))
    }

    pub fn residual(&self, p: &ModelParams) -> f64 {
        self.terms(p).sum()
    }

    /// `|residual| ≤ tol · max(1, Σ|terms|)`.
    pub fn holds(&self, p: &ModelParams, tol: f64) -> bool {
        let scale = self.terms(p).map(f64::abs).sum::<f64>().max(1.0);
        self.residual(p).abs() <= tol * scale
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut put = |f: &mut fmt::Formatter<'_>, c: f64, name: String| -> fmt::Result {
            if c == 0.0 {
                return Ok(());
            }
            let sign = if c < 0.0 {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            first = false;
            let mag = c.abs();
            if mag == 1.0 {
                write!(f, "{sign}{name}")
            } else {
                write!(f, "{sign}{mag}{name}")
            }
        };
        for (k, c) in self.couplings.iter().enumerate() {
            put(f, *c, format!("g{}", k + 1))?;
        }
        for (k, c) in self.splittings.iter().enumerate() {
            put(f, *c, format!("Δ{}", k + 1))?;
        }
        put(f, self.omega, "ω".into())?;
        write!(f, " = 0")
    }
}

impl ProductTerm {
    fn constraints(&self, n: usize, m: usize) -> Vec<LinearConstraint> {
        let mut out = Vec::new();
        let mf = m as f64;
        match &self.core {
            Some(Core::Pair {
                kind,
                first,
                second,
            }) => {
                let mut c = LinearConstraint::zero(n);
                c.couplings[*first] = 1.0;
                c.couplings[*second] = -1.0;
                out.push(c);
                let mut c = LinearConstraint::zero(n);
                let (a, b) = match kind {
                    PairKind::Even => (1.0, 1.0),
                    PairKind::OddA => (1.0, -1.0),
                    PairKind::OddB => (-1.0, 1.0),
                };
                c.splittings[*first] = a;
                c.splittings[*second] = b;
                c.omega = -mf;
                out.push(c);
            }
            Some(Core::Triple { active, rest }) => {
                let mut c = LinearConstraint::zero(n);
                c.couplings[*active] = 1.0;
                c.couplings[rest[0]] = -1.0;
                c.couplings[rest[1]] = -1.0;
                out.push(c);
                for k in [*active, rest[0], rest[1]] {
                    let mut c = LinearConstraint::zero(n);
                    c.splittings[k] = 1.0;
                    c.omega = -mf;
                    out.push(c);
                }
            }
            None => {}
        }
        for (c, d) in &self.singlets {
            let mut x = LinearConstraint::zero(n);
            x.couplings[*c] = 1.0;
            x.couplings[*d] = -1.0;
            out.push(x);
            let mut x = LinearConstraint::zero(n);
            x.splittings[*c] = 1.0;
            x.splittings[*d] = -1.0;
            out.push(x);
        }
        out
    }

    /// Πσz of the head configuration.
    fn parity(&self) -> Parity {
        let core = match &self.core {
            Some(Core::Pair {
                kind: PairKind::Even,
                ..
            }) => 1,
            Some(Core::Pair { .. }) => -1,
            Some(Core::Triple { .. }) => -1,
            None => 1,
        };
        let singlets = if self.singlets.len().is_multiple_of(2) {
            1
        } else {
            -1
        };
        Parity::from_sign(core * singlets)
    }

    fn describe(&self) -> String {
        let mut parts = Vec::new();
        match &self.core {
            Some(Core::Pair {
                kind,
                first,
                second,
            }) => parts.push(format!("{}:{},{}", kind.tag(), first + 1, second + 1)),
            Some(Core::Triple { active, rest }) => {
                parts.push(format!("3q:{}>{},{}", active + 1, rest[0] + 1, rest[1] + 1))
            }
            None => {}
        }
        for (c, d) in &self.singlets {
            parts.push(format!("s:{},{}", c + 1, d + 1));
        }
        parts.join("|")
    }
}

impl Family {
    pub fn id(&self) -> String {
        let name = match self.kind {
            FamilyKind::TwoQubitEven => "2q-even",
            FamilyKind::TwoQubitOdd => "2q-odd",
            FamilyKind::ThreeQubit => "3q",
            FamilyKind::FourQubitPair => "4q-pair",
            FamilyKind::FourQubitDark => "4q-dark",
            FamilyKind::FourQubitEqualCoupling => "4q-equal-g",
            FamilyKind::NQubitProduct => "nq-product",
        };
        let terms: Vec<String> = self.terms.iter().map(ProductTerm::describe).collect();
        format!("({}) {name}[{}]", self.kind.letter(), terms.join(" + "))
    }

    /// Whether the family has coupled photon support (as opposed to pure singlets).
    pub fn is_coupled(&self) -> bool {
        self.terms.iter().any(|t| t.core.is_some())
    }
}

/// A family instantiated for photon order `M` on chain `(i, p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyCondition {
    pub id: String,
    pub family: Family,
    pub n_qubits: usize,
    pub photon_order: usize,
    pub label: SubspaceLabel,
    /// Predicted energy divided by `ω`.
    pub energy_in_omega: f64,
    pub degeneracy: usize,
    pub constraints: Vec<LinearConstraint>,
}

impl FamilyCondition {
    pub fn new(
        family: Family,
        n_qubits: usize,
        photon_order: usize,
        initial: usize,
    ) -> Result<Self> {
        if photon_order == 0 || initial >= photon_order {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= i < M, got i = {initial}, M = {photon_order}"
            )));
        }
        let first = family
            .terms
            .first()
            .ok_or_else(|| Error::InvalidParameter("family without terms".into()))?;
        let parity = first.parity();
        let mut constraints: Vec<LinearConstraint> = Vec::new();
        for t in &family.terms {
            for c in t.constraints(n_qubits, photon_order) {
                if !constraints.contains(&c) {
                    constraints.push(c);
                }
            }
        }
        // Coupled families sit at E = E_1 + i + M - 1 with E_1 = ω; pure
        // singlet products keep the head photon energy.
        let energy_in_omega = if family.is_coupled() {
            (initial + photon_order) as f64
        } else {
            initial as f64
        };
        Ok(FamilyCondition {
            id: family.id(),
            degeneracy: family.terms.len(),
            family,
            n_qubits,
            photon_order,
            label: SubspaceLabel::new(initial, parity),
            energy_in_omega,
            constraints,
        })
    }

    pub fn energy(&self, omega: f64) -> f64 {
        self.energy_in_omega * omega
    }

    pub fn is_satisfied(&self, params: &ModelParams, tol: f64) -> bool {
        params.n_qubits == self.n_qubits
            && params.photon_order == self.photon_order
            && self.constraints.iter().all(|c| c.holds(params, tol))
    }
}

fn perfect_matchings(qubits: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if qubits.is_empty() {
        return vec![Vec::new()];
    }
    if qubits.len() % 2 == 1 {
        return Vec::new();
    }
    let first = qubits[0];
    let mut out = Vec::new();
    for idx in 1..qubits.len() {
        let rest: Vec<usize> = qubits[1..]
            .iter()
            .enumerate()
            .filter(|(k, _)| *k + 1 != idx)
            .map(|(_, q)| *q)
            .collect();
        for mut m in perfect_matchings(&rest) {
            m.insert(0, (first, qubits[idx]));
            out.push(m);
        }
    }
    out
}

fn complement(n: usize, used: &[usize]) -> Vec<usize> {
    (0..n).filter(|q| !used.contains(q)).collect()
}

/// Every family the catalog knows for `n` qubits, independent of parameters.
pub fn catalog_families(n: usize) -> Vec<Family> {
    let mut out = Vec::new();
    let pair_term = |kind, first, second, singlets: Vec<(usize, usize)>| ProductTerm {
        core: Some(Core::Pair {
            kind,
            first,
            second,
        }),
        singlets,
    };
    match n {
        2 => {
            for kind in PairKind::ALL {
                out.push(Family {
                    kind: if kind == PairKind::Even {
                        FamilyKind::TwoQubitEven
                    } else {
                        FamilyKind::TwoQubitOdd
                    },
                    terms: vec![pair_term(kind, 0, 1, vec![])],
                });
            }
        }
        3 => {
            for active in 0..3 {
                let r = complement(3, &[active]);
                out.push(Family {
                    kind: FamilyKind::ThreeQubit,
                    terms: vec![ProductTerm {
                        core: Some(Core::Triple {
                            active,
                            rest: [r[0], r[1]],
                        }),
                        singlets: vec![],
                    }],
                });
            }
        }
        4 => {
            for a in 0..4 {
                for b in a + 1..4 {
                    let r = complement(4, &[a, b]);
                    for kind in PairKind::ALL {
                        out.push(Family {
                            kind: FamilyKind::FourQubitPair,
                            terms: vec![pair_term(kind, a, b, vec![(r[0], r[1])])],
                        });
                    }
                }
            }
            for m in perfect_matchings(&[0, 1, 2, 3]) {
                out.push(Family {
                    kind: FamilyKind::FourQubitDark,
                    terms: vec![ProductTerm {
                        core: None,
                        singlets: m,
                    }],
                });
            }
            for r in 0..4 {
                for kind in PairKind::ALL {
                    let terms = complement(4, &[r])
                        .into_iter()
                        .map(|k| {
                            let s = complement(4, &[r, k]);
                            pair_term(kind, r, k, vec![(s[0], s[1])])
                        })
                        .collect();
                    out.push(Family {
                        kind: FamilyKind::FourQubitEqualCoupling,
                        terms,
                    });
                }
            }
        }
        n if n >= 5 => {
            let all: Vec<usize> = (0..n).collect();
            if n % 2 == 0 {
                for a in 0..n {
                    for b in a + 1..n {
                        let rest = complement(n, &[a, b]);
                        for m in perfect_matchings(&rest) {
                            for kind in PairKind::ALL {
                                out.push(Family {
                                    kind: FamilyKind::NQubitProduct,
                                    terms: vec![pair_term(kind, a, b, m.clone())],
                                });
                            }
                        }
                    }
                }
            } else {
                for &active in &all {
                    let others = complement(n, &[active]);
                    for (x, &b) in others.iter().enumerate() {
                        for &c in &others[x + 1..] {
                            let rest = complement(n, &[active, b, c]);
                            for m in perfect_matchings(&rest) {
                                out.push(Family {
                                    kind: FamilyKind::NQubitProduct,
                                    terms: vec![ProductTerm {
                                        core: Some(Core::Triple {
                                            active,
                                            rest: [b, c],
                                        }),
                                        singlets: m,
                                    }],
                                });
                            }
                        }
                    }
                }
            }
        }
        _ => {}
    }
    out
}

/// Every catalog family whose conditions hold for `params`, once per `i < M`.
pub fn catalog_match(params: &ModelParams, tol: f64) -> Result<Vec<FamilyCondition>> {
    params.validate()?;
    let mut out = Vec::new();
    for family in catalog_families(params.n_qubits) {
        // Conditions are the same for every i.
        let probe = FamilyCondition::new(family.clone(), params.n_qubits, params.photon_order, 0)?;
        if !probe.is_satisfied(params, tol) {
            continue;
        }
        for i in 0..params.photon_order {
            out.push(FamilyCondition::new(
                family.clone(),
                params.n_qubits,
                params.photon_order,
                i,
            )?);
        }
    }
    Ok(out)
}

/// Maps a single-photon condition onto chain `(i, ±)` of the `M`-photon model.
pub fn lift_to_multiphoton(
    cond: &FamilyCondition,
    photon_order: usize,
    initial: usize,
) -> Result<FamilyCondition> {
    if cond.photon_order != 1 {
        return Err(Error::InvalidParameter(format!(
            "lift expects a single-photon condition, got M = {}",
            cond.photon_order
        )));
    }
    FamilyCondition::new(cond.family.clone(), cond.n_qubits, photon_order, initial)
}

/// `(block, up-qubit mask, value)` entries of one factor of a product state.
type Factor = Vec<(usize, u32, f64)>;

fn bit(q: usize) -> u32 {
    1 << q
}

fn core_factor(core: &Core, p: &ModelParams, w0: f64) -> Result<Factor> {
    let g = &p.couplings;
    let d = &p.splittings;
    match core {
        Core::Pair {
            kind,
            first: a,
            second: b,
        } => {
            let h = 0.5 * (g[*a] + g[*b]);
            if h == 0.0 {
                return Err(Error::DecoupledLimit(format!(
                    "g{} = g{} = 0 makes the head amplitude singular",
                    a + 1,
                    b + 1
                )));
            }
            let (ba, bb) = (bit(*a), bit(*b));
            Ok(match kind {
                PairKind::Even => vec![
                    (0, ba | bb, (d[*a] - d[*b]) / (w0 * h)),
                    (1, ba, -1.0),
                    (1, bb, 1.0),
                ],
                PairKind::OddA | PairKind::OddB => {
                    let head = if *kind == PairKind::OddA { ba } else { bb };
                    vec![
                        (0, head, (d[*a] + d[*b]) / (w0 * h)),
                        (1, 0, 1.0),
                        (1, ba | bb, -1.0),
                    ]
                }
            })
        }
        Core::Triple { active, rest } => {
            let (a, b, c) = (*active, rest[0], rest[1]);
            let (gb, gc) = (g[b], g[c]);
            if gb == 0.0 || gc == 0.0 {
                return Err(Error::DecoupledLimit(format!(
                    "g{} and g{} must both be nonzero",
                    b + 1,
                    c + 1
                )));
            }
            let s = (d[a] + d[b] + d[c]) / 3.0 / w0;
            let sum = gb + gc;
            Ok(vec![
                (0, bit(a) | bit(b), s * gc / (gb * sum)),
                (0, bit(a) | bit(c), s * gb / (gc * sum)),
                (0, bit(b) | bit(c), -s * sum / (gb * gc)),
                (1, bit(a), 1.0),
                (1, bit(b), -1.0),
                (1, bit(c), -1.0),
                (1, bit(a) | bit(b) | bit(c), 1.0),
            ])
        }
    }
}

/// Builds the `degeneracy` states of a satisfied family, amplitudes unnormalized.
pub fn build_state(cond: &FamilyCondition, params: &ModelParams) -> Result<Vec<DarkLikeState>> {
    build_state_with_tol(cond, params, CATALOG_TOL)
}

pub fn build_state_with_tol(
    cond: &FamilyCondition,
    params: &ModelParams,
    tol: f64,
) -> Result<Vec<DarkLikeState>> {
    params.validate()?;
    if !cond.is_satisfied(params, tol) {
        let failed: Vec<String> = cond
            .constraints
            .iter()
            .filter(|c| !c.holds(params, tol))
            .map(|c| c.to_string())
            .collect();
        return Err(Error::ConstraintViolated(format!(
            "{}: {}",
            cond.id,
            failed.join(", ")
        )));
    }
    let n = params.n_qubits;
    let m = params.photon_order;
    let i = cond.label.initial;
    let reduced = params.reduced();
    let w0 = offdiag_factor(m, i, 0)?;
    let energy = cond.energy(params.omega);
    let mut states = Vec::with_capacity(cond.family.terms.len());
    for term in &cond.family.terms {
        let mut entries: Factor = match &term.core {
            Some(core) => core_factor(core, &reduced, w0)?,
            None => vec![(0, 0, 1.0)],
        };
        for (c, d) in &term.singlets {
            entries = entries
                .into_iter()
                .flat_map(|(blk, mask, v)| [(blk, mask | bit(*c), v), (blk, mask | bit(*d), -v)])
                .collect();
        }
        let terms = entries
            .into_iter()
            .map(|(blk, mask, v)| (i + blk * m, QubitConfig::new(mask, n), v));
        states.push(DarkLikeState::from_terms(
            cond.label,
            n,
            energy,
            cond.id.clone(),
            terms,
        )?);
    }
    Ok(states)
}

/// Carries a single-photon state with support on photons `{0, 1}` onto
/// chain `(i, ±)` of the `M`-photon model described by `target`.
///
/// Photon `0 → i` and `1 → i + M`; the tail amplitudes are kept and the head
/// amplitudes are re-solved from the block-1 row
/// `w_0 O c_0 + (i + M + Σ Δ z - E_i) c_1 = 0` on the original head support,
/// which carries the `sqrt((i+M)!/i!)` rescaling and the shifted splitting
/// relation.
pub fn lift_state(
    state: &DarkLikeState,
    target: &ModelParams,
    initial: usize,
) -> Result<DarkLikeState> {
    target.validate()?;
    let m = target.photon_order;
    if initial >= m {
        return Err(Error::InvalidParameter(format!(
            "initial photon {initial} must be < M = {m}"
        )));
    }
    if state.label.initial != 0 || state.max_photon() > 1 {
        return Err(Error::InvalidParameter(
            "lift expects a single-photon state with photons in {0, 1}".into(),
        ));
    }
    if state.n_qubits != target.n_qubits {
        return Err(Error::InvalidParameter(format!(
            "state has {} qubits, target model has {}",
            state.n_qubits, target.n_qubits
        )));
    }
    let n = target.n_qubits;
    let label = SubspaceLabel::new(initial, state.label.parity);
    let head: Vec<QubitConfig> = state
        .amplitudes()
        .iter()
        .filter(|a| a.photon == 0)
        .map(|a| a.qubits)
        .collect();
    let tail: Vec<(QubitConfig, f64)> = state
        .amplitudes()
        .iter()
        .filter(|a| a.photon == 1)
        .map(|a| (a.qubits, a.value))
        .collect();

    if tail.is_empty() {
        // Pure singlet product: nothing couples, only the photon energy shifts.
        let terms = head.iter().map(|q| (initial, *q, state.amplitude(0, *q)));
        return DarkLikeState::from_terms(
            label,
            n,
            state.energy + initial as f64 * target.omega,
            state.family.clone(),
            terms,
        );
    }

    let reduced = target.reduced();
    let basis = parity_chain_basis(n)?;
    let b = basis.block_dim();
    let w0 = offdiag_factor(m, initial, 0)?;
    let o = coupling_matrix(n, &reduced.couplings)?;
    // The source energy is read in units of the target ω.
    let e_target = state.energy / target.omega + (initial + m - 1) as f64;

    // rhs = -(i + M + Σ Δ z - E_i) c_1 on the block-1 sector.
    let mut rhs = DVector::zeros(b);
    for (q, v) in &tail {
        let r = basis.index_of(*q);
        let diag = (initial + m) as f64 + reduced.qubit_energy(*q) - e_target;
        rhs[r] = -diag * v;
    }
    let mut a = DMatrix::zeros(b, head.len());
    for (c, q) in head.iter().enumerate() {
        let col = basis.index_of(*q);
        for r in 0..b {
            a[(r, c)] = w0 * o[(r, col)];
        }
    }
    let svd = a.svd(true, true);
    let x = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::InvalidParameter(format!("head solve failed: {e}")))?;

    let terms = head
        .iter()
        .zip(x.iter())
        .map(|(q, v)| (initial, *q, *v))
        .chain(tail.iter().map(|(q, v)| (initial + m, *q, *v)));
    DarkLikeState::from_terms(
        label,
        n,
        e_target * target.omega,
        state.family.clone(),
        terms,
    )
}
