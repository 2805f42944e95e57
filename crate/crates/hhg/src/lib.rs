//! Runs, sweeps and analyses of helium high-harmonic generation.

pub mod config;
pub mod files;
pub mod runner;
pub mod spectral;
pub mod sweep;
