//! Transport distances, periodized Riesz potentials and interaction energies on
//! the flat torus `[-1/2, 1/2)^d`.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command line
//! driver and parallel sweeps live in the `toruspot` companion crate.
//!
//! Module map:
//! - [`torus`]: torus metric, uniform grids, grid sets and their morphology.
//! - [`measures`]: atomic and grid measures, the bump and Laplacian families,
//!   Fourier coefficients.
//! - [`dinfty`]: Wasserstein-infinity distance through bipartite max-flow.
//! - [`riesz`]: Ewald evaluation of `W_s`, spectral potentials, norms.
//! - [`energy`]: interaction energies and perturbed kernels.
//! - [`flow`]: particle gradient flow and cluster statistics.
//! - [`experiments`]: scaling sweeps built from the modules above.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod dinfty;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod flow;
pub mod kernel;
pub mod maxflow;
pub mod measures;
pub mod mollifier;
pub mod quadrature;
pub mod riesz;
pub mod special;
pub mod stats;
pub mod torus;

pub use error::{Error, Result};
