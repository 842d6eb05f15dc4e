//! Mirror/reflection coupling for SDEs driven by rotationally invariant
//! pure-jump Lévy noise.
//!
//! The crate builds the concave distance function `f = f1 + a 1_{(0,inf)}`
//! and its contraction rate from the jump measure and the drift, simulates
//! the coupled pair, and checks the resulting contraction bounds
//! empirically.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contraction;
pub mod coupling_sim;
pub mod drift;
pub mod error;
pub mod levy_measure;
pub mod metrics;
pub mod pipeline;
pub mod quadrature;

pub use error::{Error, Result};
