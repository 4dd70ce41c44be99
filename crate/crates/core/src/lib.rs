//! Dynamics of the rational family `f(z) = z^2 + c + b/(z - a)`.
//!
//! The crate iterates and classifies critical orbits, evaluates the Green
//! and Koenigs potentials, codes Cantor Julia sets by the full shift, checks
//! basins for the exotic (completely invariant, non-simply-connected)
//! configuration, and reproduces the `(k, w)` parameter-plane experiment.

pub mod error;
pub mod exotic;
pub mod family;
pub mod poly;
pub mod potential;
pub mod orbits;
pub mod raster;
pub mod render;
pub mod scan;
pub mod symbolic;

pub use error::{Error, ErrorClass, Result};
pub use family::{Complex, KwParams, MapParams, Point};
