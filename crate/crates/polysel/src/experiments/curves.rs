use polysel_core::kernel::{ci_location, quantile_floor};
use polysel_core::IntervalUnion;
use serde::Serialize;

use crate::error::{config_err, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthRow {
    pub w: f64,
    pub lower: f64,
    pub upper: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthCurve {
    pub rows: Vec<LengthRow>,
    /// One note per skipped grid point.
    pub notes: Vec<String>,
}

/// Equal-tailed interval `[L(w), U(w)]` at each grid point inside `set`.
pub fn run_length_curve(set: &IntervalUnion, var: f64, alpha: f64, grid: &[f64]) -> Result<LengthCurve> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(config_err(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mut rows = Vec::with_capacity(grid.len());
    let mut notes = Vec::new();
    for &w in grid {
        if !set.contains(w) {
            notes.push(format!("skipped w = {w}: outside the truncation set"));
            continue;
        }
        let (lower, upper) = ci_location(set, var, w, alpha / 2.0, alpha / 2.0)?;
        rows.push(LengthRow {
            w,
            lower,
            upper,
            length: upper - lower,
        });
    }
    Ok(LengthCurve { rows, notes })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloorRow {
    pub theta: f64,
    pub kappa: f64,
    pub floor: f64,
}

/// Asymptotic quantile floors of the interval length for `T = (-∞, upper)`.
pub fn run_floor_curves(thetas: &[f64], var: f64, upper: f64, kappas: &[f64], alpha: f64) -> Result<Vec<FloorRow>> {
    let set = IntervalUnion::interval(f64::NEG_INFINITY, upper)?;
    let mut rows = Vec::with_capacity(thetas.len() * kappas.len());
    for &theta in thetas {
        for &kappa in kappas {
            rows.push(FloorRow {
                theta,
                kappa,
                floor: quantile_floor(theta, var, &set, kappa, alpha)?,
            });
        }
    }
    Ok(rows)
}
