//! Equivariant vector bundles, invariant connections and Hodge–Dirac
//! operators on compact homogeneous spaces G/K, with a numeric backend
//! specialised to SU(2).

pub mod bundle;
pub mod clifford;
pub mod config;
pub mod dirac;
pub mod error;
pub mod geometry;
pub mod lie;
pub mod metric;
pub mod quadrature;
pub mod rep;
pub mod report;
pub mod run;
pub mod section;
pub mod spectral;

pub use error::{Error, Result};
