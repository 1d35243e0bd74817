//! Exact mutual-information generalization bounds for learning algorithms
//! over finite spaces.
//!
//! Algorithms are represented as row-stochastic kernels from enumerated
//! datasets to hypotheses. Information quantities, risks and bound checks are
//! computed by full enumeration of the joint law, with a Monte Carlo path for
//! sampling-based estimates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod info;
pub mod montecarlo;
pub mod risk;
pub mod spaces;
pub mod sweep;

pub use error::{Error, Result};
