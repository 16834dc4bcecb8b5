//! Hausdorff dimension of quasi-circle Julia sets J(z^2 + c) for small |c|,
//! computed by solving the pressure equation P(-s log|f'|) = 0 over
//! dyadically coded preimage trees of the fixed point alpha, cross-checked
//! against the asymptotic 1 + |c|^2/(4 log 2), a periodic-point pressure
//! estimator, and a box-counting oracle.
//!
//! The 2^n tree enumeration is data parallel (rayon, behind the default
//! `parallel` feature) with a fixed-shape pairwise reduction, so every
//! result is bit-identical for any thread count.

pub mod bowen;
pub mod boxdim;
pub mod cli;
pub mod coding;
pub mod dynamics;
pub mod error;
pub mod identities;
pub mod pressure;

pub use error::{Error, Result};
pub use num_complex::Complex64;
