//! Pseudospectral simulation of the intermediate long wave family on the torus
//! and numerical checks of its deep- and shallow-water limits.

pub mod cli;
mod error;
pub mod evolution;
pub mod experiments;
pub mod fit;
pub mod io;
pub mod resonance;
pub mod spectral;
pub mod symbols;

pub use error::{Error, Result};
