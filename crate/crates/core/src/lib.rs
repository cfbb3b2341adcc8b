//! Weyl-Wigner-Moyal phase-space toolkit for a relativistic scalar particle.

pub mod accel;
pub mod basis;
pub mod derivatives;
pub mod error;
pub mod evolution;
pub mod fourier;
pub mod free;
pub mod grid;
pub mod hamiltonian;
pub mod io;
pub mod ladder;
pub mod special;
pub mod spectra;
pub mod star;
pub mod state;
pub mod symbol;
pub mod wigner;

pub use error::{Error, Result};
