//! Radial discretization: graded grid, weighted quadrature, flux-form
//! Laplacian, profiles and their resampling.

mod grid;
pub mod io;
mod profile;

pub use grid::{sphere_area, GridSpec, RadialGrid};
pub use profile::{constrained_gradient, RadialProfile};
