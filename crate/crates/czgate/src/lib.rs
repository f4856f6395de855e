//! Simulator for a controlled-Z gate between two superconducting qubits
//! coupled through a voltage-tunable semiconductor junction.
//!
//! Units: h = 1, energies in GHz, times in ns; a level with energy E
//! accumulates phase 2π·E·t.

pub mod cli;
pub mod devices;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod hjunction;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod roots;

pub use error::{CzError, Result};
