//! Stochastic smoothing accelerated gradient (SSAG) methods for nonsmooth
//! convex composite problems `min_{x in X} f(x) + h(x)`.
//!
//! The nonsmooth part `h` is replaced by a smoothing function `h~_mu` with
//! certified constants ([`smoothing::SmoothingParams`]); the solver in
//! [`solver`] drives `mu` to zero along an accelerated schedule while
//! sampling mini-batch stochastic gradients.
//!
//! Start with the runnable programs in `examples/`.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
mod error;
pub mod harness;
pub mod linalg;
pub mod problems;
pub mod projection;
pub mod smoothers;
pub mod smoothing;
pub mod solver;

pub use error::{Error, Result};
