// SPDX-License-Identifier: Apache-2.0

//! Dark-like states: eigenstates of a chain with bounded photon support whose
//! energy does not depend on the coupling strength.

pub mod catalog;
pub mod scan;
pub mod state;
pub mod verify;

pub use catalog::{
    build_state, build_state_with_tol, catalog_families, catalog_match, lift_state,
    lift_to_multiphoton, Core, Family, FamilyCondition, FamilyKind, LinearConstraint, PairKind,
    ProductTerm, CATALOG_TOL,
};
pub use scan::{generic_scan, ScanOptions, ScanOutcome, ScanState};
pub use state::{Amplitude, AmplitudeJson, DarkLikeState, StateJson};
pub use verify::{verify_state, VerifyReport, VERIFY_TOL};
