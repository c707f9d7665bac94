//! Spin-dynamics simulation and device planning for plane-addressed proton
//! qubits in hydroxyapatite.
//!
//! Hydroxyl protons form chains along the static field; a field gradient
//! gives every lattice plane its own resonance, and each plane acts as an
//! ensemble qubit. The crate covers the lattice and its dipolar couplings,
//! exact dense simulation of small clusters, pulse programs with their
//! zeroth-order average Hamiltonians, two-qubit gate synthesis and the
//! resource arithmetic for a macroscopic sample.

pub mod cli;
pub mod config;
pub mod constants;
pub mod couplings;
pub mod error;
pub mod format;
pub mod gates;
pub mod lattice;
pub mod planner;
pub mod sequences;
pub mod spinsim;

pub use error::{Error, Result};
