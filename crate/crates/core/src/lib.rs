//! Long-range order detection in spin chains from block mutual information,
//! and order operators built from reduced-density-matrix spectra.

pub mod cli;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod mi;
pub mod models;
pub mod orderparam;

pub use error::{Error, Result};
