//! Virgin Island Model toolkit: deterministic extinction/growth analysis of
//! branching island populations driven by one-dimensional diffusion
//! excursions, cross-validated by Monte Carlo simulation.
//!
//! The numeric core is generic over the scalar type through [`scalar::Scalar`];
//! the aliases at the crate root fix the default `f64` instantiation used by
//! the analysis pipeline and the command line.

pub mod bvp;
pub mod checks;
pub mod coeffs;
pub mod error;
pub mod excursion;
pub mod num;
pub mod renewal;
pub mod rng;
pub mod scale;
pub mod scalar;
pub mod sde;
pub mod tree;

pub use error::{Error, Result};

/// Default-precision coefficient set.
pub type CoefficientSet = coeffs::CoefficientSet<f64>;
/// Default-precision validated coefficients.
pub type Coeffs = coeffs::Coeffs<f64>;
/// Default-precision scale table.
pub type ScaleTable = scale::ScaleTable<f64>;
/// Default-precision grid tuning.
pub type GridSpec = scale::GridSpec<f64>;
