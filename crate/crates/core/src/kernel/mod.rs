//! Truncated Gaussian laws on interval unions and the pivot-based interval.

pub mod bounds;
pub mod interval;
pub mod normal;
pub mod pivot;
pub mod truncated;

pub use bounds::{length_bounds, min_coverage_mass, quantile_floor};
pub use interval::IntervalUnion;
pub use pivot::{ci_location, solve_location};
pub use truncated::{log_gauss_mass, TruncatedGaussian};
