//! Thermodynamic-formalism estimators for explicit hyperbolic model systems.
//!
//! The crate works on piecewise-affine models (linear horseshoes, expanding
//! circle maps, Cantor repellers, the cat map) where the derivative is
//! constant on every branch. That makes topological pressure, the expansion
//! rate `s` and the dimension bound `n + P(phi)/s` exactly computable, so the
//! geometric estimators (volume growth of Bowen neighbourhoods, box counting,
//! Minkowski content) can be checked against closed forms.
//!
//! Modules:
//!
//! - [`models`]: ambient spaces, affine branches, built-in model constructors
//! - [`symbolic`]: subshifts of finite type, partition sums, spectral pressure,
//!   Markov measures
//! - [`pressure`]: Bowen balls, cylinder covers, neighbourhood volumes and
//!   pressure estimators
//! - [`dimension`]: expansion rate, box counting, Minkowski content, the
//!   dimension bound and the attractor/SRB report
//!
//! The crate is `no_std` and only needs `alloc`. Grid sweeps are exposed
//! cell-by-cell so a `std` caller can parallelize them without changing the
//! result.

#![no_std]

extern crate alloc;

pub mod dimension;
mod error;
pub mod fit;
pub mod linalg;
pub(crate) mod math;
pub mod models;
pub mod pressure;
pub mod symbolic;

pub use error::{Error, Result};

/// Largest number of symbol words any enumeration may visit (`2^24`).
pub const WORD_CAP_LOG2: f64 = 24.0;

/// Largest number of grid cells a sweep may visit (`2^26`).
pub const GRID_CELL_CAP: u64 = 1 << 26;

/// Classification tolerance for exact (spectral) pressure values.
pub const EXACT_TOLERANCE: f64 = 1e-9;

/// Classification tolerance for geometric estimators.
pub const ESTIMATOR_TOLERANCE: f64 = 0.02;
