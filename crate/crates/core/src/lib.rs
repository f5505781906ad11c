//! Numerics for the fixed trace square ensemble: Selberg-type closed-form
//! integrals with independent oracles, exact finite-N GUE level densities,
//! seeded Monte Carlo sampling of fixed-trace spectra, the radial mixing
//! integral equation relating the two densities, and the semicircle limit.

// Domain checks are written as `!(x > 0.0)` so that NaN fails them too;
// the positive comparison would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod gue;
pub mod integral_eq;
pub mod manifest;
pub mod oracles;
pub mod quad;
pub mod sampler;
pub mod selberg;
pub mod specfun;

pub use error::Error;
