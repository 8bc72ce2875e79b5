//! Polyhedral selective inference for the Lasso.
//!
//! The crate is `no_std` (it needs `alloc`) and purely numerical:
//!
//! - [`kernel`]: truncated Gaussian laws over finite unions of open intervals,
//!   the pivot-inversion confidence interval built on them, and the length
//!   bounds and quantile floors that govern how wide that interval gets.
//! - [`lasso`]: coordinate-descent Lasso with exact zeros and KKT checks.
//! - [`geometry`]: selection-event polyhedra and their sections along the
//!   contrast direction, which produce the truncation sets.
//! - [`inference`]: sign- and model-conditional intervals, the ex-post
//!   certificate of infinite expected interval length, and the
//!   variance plug-in.
//!
//! IO, simulation and the command line live in the `polysel` crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod geometry;
pub mod inference;
pub mod kernel;
pub mod lasso;
pub mod linalg;
pub mod roots;

pub use error::{Error, Result};
pub use kernel::{IntervalUnion, TruncatedGaussian};
pub use linalg::Matrix;
