//! Semiclassical tunneling toolkit: instanton and bounce paths, fluctuation
//! determinants, splittings, Bloch bands and decay rates for Josephson-junction
//! qubit potentials, with exact-diagonalization oracles to check them against.

pub mod asymptotics;
pub mod determinants;
pub mod error;
pub mod gl_junction;
pub mod numerics;
pub mod oracle;
pub mod potential;
pub mod spectra;
pub mod trajectory;
pub mod wkb;

pub use error::{Error, Result};
