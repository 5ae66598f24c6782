//! Numerical toolkit for the small-coupling limit of SU(2) Yang-Mills-Higgs pairs.
//!
//! Pairs `(Phi, A)` with `Phi` a section of `Im(H)` and `A` an `Im(H)`-valued connection
//! form live on uniform grids in `R^3` or `R^4`. The crate provides the discrete exterior
//! calculus, energy and concentration forms, BPS monopoles, the recovery construction,
//! discrete currents and the Plateau-type boundary reduction.

pub mod bps;
pub mod currents;
pub mod error;
pub mod fields;
pub mod forms;
pub mod gauge;
pub mod plateau;
pub mod quat;
pub mod recovery;

pub use error::{Error, Result};

/// Crate version, embedded in experiment outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Scalars usable by closed-form fields: `f64` and (nested) dual numbers over it.
pub trait Scalar: num_dual::DualNum<Primitive = f64> + Copy + Send + Sync {}
impl<T: num_dual::DualNum<Primitive = f64> + Copy + Send + Sync> Scalar for T {}
