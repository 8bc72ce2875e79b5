use polysel_core::inference::{estimate_variance, Level, Selected, Target};
use polysel_core::Matrix;
use serde::Serialize;

use super::{format_model, format_signs, verdict_label};
use crate::error::{config_err, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CiRow {
    pub conditioning: &'static str,
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
    pub variance: f64,
    pub sigma2: f64,
    pub model: String,
    pub signs: String,
    pub verdict: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiReport {
    pub rows: Vec<CiRow>,
    pub sigma2_estimated: bool,
}

/// Both selective intervals for one dataset. `u` randomizes the empty-model
/// interval.
#[allow(clippy::too_many_arguments)]
pub fn run_ci(
    x: &Matrix,
    y: &[f64],
    lambda: f64,
    position: usize,
    sigma2: Option<f64>,
    alpha: f64,
    cap: usize,
    u: f64,
) -> Result<CiReport> {
    let level = Level::two_sided(alpha)?;
    let (sigma2, sigma2_estimated) = match sigma2 {
        Some(s) if s > 0.0 && s.is_finite() => (s, false),
        Some(s) => return Err(config_err(format!("sigma2 must be positive, got {s}"))),
        None => (estimate_variance(x, y)?, true),
    };
    let sel = Selected::new(x, y, lambda)?;
    if sel.fit().boundary_flag {
        return Err(polysel_core::Error::Boundary.into());
    }
    let target = Target::Position(position);
    let verdict = if sel.model().is_empty() {
        "not_certified"
    } else {
        verdict_label(sel.certificate(&target, cap)?.verdict)
    };
    let (model, signs) = (format_model(sel.model()), format_signs(sel.signs()));
    let rows = [
        sel.ci_given_signs(&target, sigma2, level, u)?,
        sel.ci_given_model(&target, sigma2, level, cap, u)?,
    ]
    .into_iter()
    .map(|ci| CiRow {
        conditioning: ci.conditioning.label(),
        lower: ci.lower,
        upper: ci.upper,
        estimate: ci.estimate,
        variance: ci.variance,
        sigma2,
        model: model.clone(),
        signs: signs.clone(),
        verdict,
    })
    .collect();
    Ok(CiReport { rows, sigma2_estimated })
}
