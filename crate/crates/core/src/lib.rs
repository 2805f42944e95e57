//! Numerical core for simulating high-harmonic generation in helium driven by
//! few-cycle laser pulses.
//!
//! Two models share one spectral discretization (radial B-splines times
//! Legendre angular channels): a single-active-electron model with a fitted
//! effective potential, and exchange-only time-dependent Kohn–Sham theory
//! for the spin-degenerate two-electron ground state. Time evolution uses a
//! Krylov short-time exponential in the overlap metric.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the CLI and
//! FFT-based spectral transforms live in the `hhg` crate.

#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod basis;
pub mod bspline;
mod codec;
pub mod eigen;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod observables;
pub mod propagator;
pub mod pulse;
pub mod quadrature;
pub mod sae;
pub mod tddft;

pub use error::{Error, Result};
