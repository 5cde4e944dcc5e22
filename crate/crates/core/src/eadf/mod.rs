//! The effective aperture distribution function: a centered 2D spatial
//! spectrum of a full-sphere-extended pattern, and everything built on it.

mod array;
mod budget;
mod transform;

pub use array::{array_response, ArrayModel, ElementModel, Mode};
pub use budget::{max_spatial_freq, SpatialFreqBudget};
pub use transform::{
    forward, reconstruct, reconstruct_at, reconstruct_grid, truncate, Eadf, SpectralWindow,
};
