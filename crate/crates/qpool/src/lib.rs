//! Pooling designs over finite sets and finite vector spaces.
//!
//! A pooling design is a binary pools x items incidence matrix used to run
//! group tests in parallel. This crate builds the four classical containment
//! and intersection families (subsets of [n] and subspaces of GF(q)^n),
//! evaluates their error-correction bounds in exact integer arithmetic,
//! measures disjunctness parameters by exhaustive or sampled search, and
//! simulates error-tolerant decoding.
//!
//! Module map:
//!
//! - [`exact`]: Gaussian coefficients, counting formulas, disjunctness bounds
//! - [`gf`]: arithmetic in GF(q)
//! - [`grassmann`]: canonical subspaces, enumeration, ranking
//! - [`design`]: matrix construction and the versioned file format
//! - [`disjunct`]: disjunctness measurement and falsification sampling
//! - [`simulate`]: group-testing encode / error-inject / decode trials

pub mod bits;
pub mod design;
pub mod disjunct;
pub mod error;
pub mod exact;
pub mod gf;
pub mod grassmann;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
pub use num_bigint::BigUint;
