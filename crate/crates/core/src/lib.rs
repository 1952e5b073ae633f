//! Photon transport in one-dimensional coupled-cavity arrays.
//!
//! Exact evolution in fixed photon-number sectors, revival periods from the
//! mode spectrum, W/NOON event detection, entangled-pair transfer, and photon
//! loss through a master equation in the single-excitation subspace.

pub mod cli;
pub mod detection;
pub mod error;
pub mod evolution;
pub mod fock;
pub mod lindblad;
pub mod spectral;
pub mod states;

pub use error::{CcaError, Result};
