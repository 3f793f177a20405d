//! Cavity-QED modeling and data analysis for a single solid-state emitter in a
//! tunable Fabry-Perot micro-cavity.
//!
//! The crate is organised by physical subsystem:
//!
//! - [`spectra`]: free-space emitter spectra (zero-phonon line plus acoustic
//!   phonon wings), Debye-Waller measurement and Lorentzian convolution.
//! - [`cavity`]: longitudinal Fabry-Perot modes, loss budgets, Q and finesse.
//! - [`cqed`]: Purcell factor, brightening ratios, the brightness profile
//!   `beta(omega_cav)`, modulation envelopes and Rabi-coupling extraction.
//! - [`dynamics`]: decay traces, biexponential fits, saturation curves and
//!   three-level intensity correlations.
//! - [`budget`]: photon efficiency chains and port ratios.
//! - [`io`]: CSV/JSON formats shared with the command-line front end.
//!
//! Units are fixed crate-wide: energies and rates in µeV (a rate `γ` stands
//! for `ħ/τ`), times in ps, wavelengths in nm. See [`units`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod cavity;
pub mod cqed;
pub mod dynamics;
mod error;
pub mod fit;
pub mod fixtures;
pub mod io;
pub mod spectra;
pub mod units;

pub use error::{Error, Result};
