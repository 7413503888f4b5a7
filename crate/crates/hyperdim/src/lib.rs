//! Std companion to `hyperdim-core`: model files and the `name:params`
//! grammar, rayon-parallel grid sweeps, CSV and JSON emission with atomic
//! writes, and the `hyperdim` command-line front end.

pub mod cli;
pub mod csv;
pub mod io;
pub mod model_file;
pub mod model_spec;
pub mod parallel;

pub use hyperdim_core as core;
