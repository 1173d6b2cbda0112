//! Entropic inference kit.
//!
//! Numerical tools for updating probability distributions and density
//! matrices by relative-entropy maximization, the measurement calculus built
//! on top of that (Lüders collapse, quantum Bayes/Jeffreys rules, thermal and
//! canonically modified variants), and a 1-D lattice simulator exhibiting
//! the Fokker-Planck / Schrödinger correspondence together with
//! weak-measurement inference from position detections.
//!
//! The numerical core is generic over the real scalar type (`f32`/`f64`)
//! through [`scalar::RealScalar`]; the aliases below fix `f64`, which is what
//! the command-line tool and the acceptance suite use.

// Numeric kernels index ranges on purpose, and `!(x > 0)` rejects NaN where
// `x <= 0` would admit it.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod scalar;

pub mod matrix;

pub mod entropy;

pub mod classical;

pub mod quantum;

pub mod measurement;

pub mod dynamics;

pub mod weak;

pub mod random;

pub mod jsonio;

#[cfg(test)]
pub(crate) mod test_support;

pub use scalar::RealScalar;

/// Concrete `f64` aliases.
pub type Real = f64;
pub type Complex = num_complex::Complex<f64>;
pub type Matrix = matrix::ComplexMatrix<f64>;
pub type Hermitian = matrix::HermitianObservable<f64>;
pub type Density = matrix::DensityMatrix<f64>;
pub type Spectral = matrix::SpectralDecomposition<f64>;
