//! Space-like Plateau problem in Minkowski space `R^{2,1}` for contours on
//! the hyperboloid `|z|^2 - theta^2 = 1`, conformal disc parametrizations
//! and the Dirichlet Green function of the unit disc.

pub mod boundary;
pub mod coeffs;
pub mod error;
pub mod fourier;
pub mod green;
pub mod invert;
pub mod map;
pub mod plateau;
pub mod polygon;

pub use error::{Result, SurfaceError};
pub use map::SurfaceMap;
