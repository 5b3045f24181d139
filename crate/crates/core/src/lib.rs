//! Random pairs of projections: sampling, spectra, tracial states and
//! large-deviation rate functions.

pub mod cli;
pub mod ensembles;
pub mod error;
pub mod harness;
pub mod limits;
pub mod linalg;
pub mod quad;
pub mod rate;
pub mod rng;
pub mod spectra;
pub mod tolerance;
pub mod tracial;

pub use error::{Error, Result};
