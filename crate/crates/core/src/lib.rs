//! Numerical companion for exponential systems with lacunary spectra.

pub mod breaker;
pub mod certifier;
pub mod cli;
pub mod config;
pub mod defect;
pub mod error;
pub mod genfun;
pub mod pw;
pub mod roots;
pub mod special;
pub mod spectra;
pub mod summation;

pub use error::{Error, Result};
