//! Parking process on trees.
//!
//! Cars arrive i.i.d. at the vertices of a d-ary (or Galton-Watson) tree,
//! drive towards the root and park in the first free spot. This crate
//! computes the law of `X_n`, the number of cars reaching the root by time
//! `n`, either exactly or as certified lower bounds, and uses it to certify
//! bounds on the critical arrival density.
//!
//! Module map:
//!
//! * [`numerics`]: exact rationals and truncating fixed-point decimals.
//! * [`dist`]: integer-supported laws, convolution, the `(x-1)^+` map.
//! * [`recursion`]: the distributional recursion on the d-ary tree.
//! * [`bounds`]: upper-bound certificates and closed-form bounds.
//! * [`montecarlo`]: sampled trees, the literal car-movement oracle, estimators.
//! * [`order`]: increasing-convex-order comparisons.
//! * [`modular`]: multi-modular proofs of exact identities on huge laws.

pub mod bounds;
pub mod dist;
pub mod error;
pub mod modular;
pub mod montecarlo;
pub mod numerics;
pub mod order;
pub mod recursion;

pub use error::{Error, Result};

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
