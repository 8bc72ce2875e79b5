//! Monte Carlo experiments.
//!
//! Replications run on the current rayon pool and are collected in index
//! order, so output does not depend on the number of workers.

mod ci;
mod coverage;
mod curves;
mod heatmap;
mod quantiles;

pub use ci::{run_ci, CiReport, CiRow};
pub use coverage::{run_coverage_check, CoverageOutput, CoverageRecord, CoverageRow};
pub use curves::{run_floor_curves, run_length_curve, FloorRow, LengthCurve, LengthRow};
pub use heatmap::{run_heatmap, HeatmapCell, HeatmapOutput, HeatmapRecord};
pub use quantiles::{run_quantile_study, NormSummary, QuantileOutput, QuantileRecord, QuantileRow};

use polysel_core::inference::{BoundedSide, Verdict};
use polysel_core::lasso::{fit_default, LassoFit, LassoProblem};
use polysel_core::Matrix;
use rand_chacha::ChaCha8Rng;

use crate::error::{HarnessError, Result};
use crate::sim::response;

/// Boundary-flagged fits are redrawn at most this many times per replication.
pub const MAX_REDRAWS: usize = 1000;

/// A response and its non-flagged Lasso fit.
pub(crate) struct Draw {
    pub y: Vec<f64>,
    pub fit: LassoFit,
    pub redraws: usize,
}

/// Draws `y = mu + N(0, σ²)` until the fit is not boundary-flagged.
pub(crate) fn draw_fit(x: &Matrix, mu: &[f64], sigma: f64, lambda: f64, rng: &mut ChaCha8Rng) -> Result<Draw> {
    for redraws in 0..=MAX_REDRAWS {
        let y = response(rng, mu, sigma);
        let fit = fit_default(&LassoProblem::new(x, &y, lambda)?)?;
        if !fit.boundary_flag {
            return Ok(Draw { y, fit, redraws });
        }
    }
    Err(HarnessError::RedrawLimit(MAX_REDRAWS))
}

pub fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::CertifiedInfinite(BoundedSide::Above) => "certified_infinite_above",
        Verdict::CertifiedInfinite(BoundedSide::Below) => "certified_infinite_below",
        Verdict::CertifiedInfinite(BoundedSide::Both) => "certified_infinite_both",
        Verdict::NotCertified => "not_certified",
        Verdict::UndecidedCapacity => "undecided_capacity",
    }
}

pub(crate) fn format_model(model: &[usize]) -> String {
    let parts: Vec<String> = model.iter().map(usize::to_string).collect();
    format!("[{}]", parts.join(" "))
}

pub(crate) fn format_signs(signs: &[i8]) -> String {
    signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}
