//! Finite-time Carnot cycle of a quantum information engine.
//!
//! The cold bath of a Carnot engine is replaced by a reversible
//! measurement-plus-feedback step acting on a working medium with a scaling
//! Hamiltonian `H_t = ω_t 𝒫`. The crate provides:
//!
//! - [`states`]: thermal states, entropy, energy and polarization;
//! - [`measurement`]: the two-outcome Kraus channel and its feedback maps;
//! - [`isotherm`]: the detailed-balance master equation on the hot isotherm;
//! - [`cycle`]: the assembled cycle and its energy/entropy ledger;
//! - [`optimizer`]: maximum-power formulas and a golden-section oracle.
//!
//! Units: `k = ħ = 1`.

pub mod cycle;
pub mod error;
pub mod isotherm;
pub mod measurement;
pub mod optimizer;
pub mod states;

pub use error::{Error, Result};
