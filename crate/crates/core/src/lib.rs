//! Hypergeometric functions for root systems with negative multiplicities:
//! root data, weights, c-functions, the series expansion, residual
//! subspaces and a numerical Plancherel check.

pub mod cfunc;
pub mod error;
pub mod gamma;
pub mod linalg;
pub mod plancherel;
pub mod poly;
pub mod quadrature;
pub mod residual;
pub mod rootsys;
pub mod series;
pub mod trigpoly;
pub mod weights;

pub use error::{Error, Result};
pub use rootsys::{Family, OrbitData, RootSystem};
pub use weights::Multiplicity;
