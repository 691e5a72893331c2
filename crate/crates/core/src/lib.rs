//! Numerical toolkit for fractional Sobolev seminorms, fractional
//! p-Laplacian pairings and the nonlocal commutator estimates built on them.
//!
//! Everything lives on a uniform periodic grid ([`grid::Grid`]). Double sums
//! are evaluated in parallel with a fixed reduction order (see [`reduce`]),
//! so results do not depend on the thread count.

pub mod commutator;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod pairing;
pub mod params;
pub mod reduce;
pub mod report;
pub mod sobolev;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{Domain, Grid, GridBox, SampledFunction};
pub use params::FracParams;
