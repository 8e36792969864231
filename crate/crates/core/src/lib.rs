//! Branching random walks with geometric step sizes on regular trees.
//!
//! A vertex v of the ℓ-ary tree carries the value f(v) = Σ_{j≤|v|} a_{v|j} λ^j
//! where the labels a_v are i.i.d. digits. This crate builds the empirical
//! measures of these values, their deterministic self-similar counterparts,
//! Fourier-side quantities, base-λ expansions and covering conditions, and the
//! gap structure of the random support.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod error;
pub mod expansions;
pub mod fourier;
pub mod measure;
pub mod params;
pub mod support;
pub mod tree;

pub use error::{Error, Result};
pub use params::{Digit, IntPolynomial, ParameterSet};
