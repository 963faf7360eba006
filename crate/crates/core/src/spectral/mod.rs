//! Periodic grids, real transforms, dyadic projectors and Sobolev-type norms.

mod dyadic;
mod field;
mod grid;
mod random;

pub use dyadic::{
    block_multiplier, dyadic_blocks, envelope_norm, eta, regularize_envelope, BlockProfile,
    FrequencyEnvelope,
};
pub use field::SpectralField;
pub use grid::{Grid, RealTransform};
pub use random::{random_hs_field, SplitMix64};
