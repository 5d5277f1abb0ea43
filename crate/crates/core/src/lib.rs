//! Orbit-method eigenvalue asymptotics for Schrödinger operators with
//! polynomial electric and magnetic potentials.

pub mod asym;
pub mod cli;
pub mod curve;
pub mod exact;
pub mod liealg;
pub mod orbit;
pub mod poly;
pub mod scaling;
pub mod spectra;
