//! Numerical laboratory for the geometry of finite-dimensional Banach spaces.

pub mod error;
pub mod harmonic;
pub mod lattice_convex;
pub mod moduli;
pub mod parallel;
pub mod quadrature;
pub mod random;
pub mod report;
pub mod represent;
pub mod search;
pub mod series;
pub mod space;

pub use error::{GeomError, Result};
