//! Constructive finite-dimensional approximations of PDE solution operators and
//! their assembly into branch x trunk sums.
//!
//! Layout follows the pipeline: grids and interpolation, the Burgers and
//! advection-diffusion operators, the rank-one cascade for 2D finite differences,
//! ReLU networks, and the DeepONet assembly that ties them together.

pub mod advdiff;
pub mod burgers;
pub mod cascade;
pub mod deeponet;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod interp;
pub mod norms;
pub mod quadrature;
pub mod rates;
pub mod relu;

pub use error::{Error, Result};
