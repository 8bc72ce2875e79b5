//! Length bounds for the pivot interval and its quantile floor.

use super::interval::IntervalUnion;
use super::normal;
use super::truncated::LogAcc;
use crate::error::{domain, Result};
use crate::roots::golden_section_min;

/// Grid resolution for the coverage-mass minimization, in standard deviations.
const GRID_STEP: f64 = 1.0 / 50.0;
const MAX_GRID_POINTS: usize = 1_000_000;

fn mass(set: &IntervalUnion, theta: f64, sd: f64) -> f64 {
    let mut acc = LogAcc::new();
    for &(a, b) in set.pieces() {
        acc.add(normal::log_mass_std((a - theta) / sd, (b - theta) / sd, (b - a) / sd));
    }
    libm::exp(acc.value())
}

/// `p* = inf_θ P(N(θ, var) ∈ T)`.
///
/// Zero when `T` is bounded on either side. Otherwise the mass is minimized
/// on a grid over `[b_1 - 5ς, a_K + 5ς]` and refined by golden-section search.
pub fn min_coverage_mass(set: &IntervalUnion, var: f64) -> f64 {
    if set.bounded_above() || set.bounded_below() {
        return 0.0;
    }
    if set.len() == 1 {
        return 1.0;
    }
    let sd = libm::sqrt(var);
    let lo = set.pieces()[0].1 - 5.0 * sd;
    let hi = set.pieces()[set.len() - 1].0 + 5.0 * sd;
    let n = (libm::ceil((hi - lo) / (GRID_STEP * sd)) as usize).clamp(2, MAX_GRID_POINTS);
    let step = (hi - lo) / n as f64;

    let (mut best_i, mut best) = (0usize, f64::INFINITY);
    for i in 0..=n {
        let m = mass(set, lo + i as f64 * step, sd);
        if m < best {
            best = m;
            best_i = i;
        }
    }
    let a = lo + best_i.saturating_sub(1) as f64 * step;
    let b = lo + (best_i + 1).min(n) as f64 * step;
    let (_, refined) = golden_section_min(|t| mass(set, t, sd), a, b, 1e-10);
    let p_star = best.min(refined);

    debug_assert!({
        let delta = set.gap_span() / (2.0 * sd);
        p_star >= 2.0 * normal::cdf(-delta) - 1e-12
    });
    p_star
}

/// Upper bounds on `U(w) - L(w)` valid for every `w ∈ T`:
/// `tight = 2ς Φ⁻¹(1 - p* α/2)` and `loose = 2ς Φ⁻¹(1 - α/2) + (a_K - b_1)`.
/// Both are `+∞` when `p* = 0`.
pub fn length_bounds(set: &IntervalUnion, var: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain!("alpha must lie in (0, 1), got {alpha}"));
    }
    let p_star = min_coverage_mass(set, var);
    if p_star == 0.0 {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    let sd = libm::sqrt(var);
    let tight = 2.0 * sd * normal::quantile_upper(p_star * alpha / 2.0);
    let loose = 2.0 * sd * normal::quantile_upper(alpha / 2.0) + set.gap_span();
    Ok((tight, loose))
}

/// Asymptotic lower bound `r(κ)` on the κ-quantile of the pivot-interval
/// length as `κ → 1`, for `T` bounded on at least one side.
///
/// `r(κ) = ς ln((2-α)/α) / (1-κ) · ρ`, where `ρ` is the Mills-type ratio at the
/// finite boundary: `φ(x)/Φ(x)` with `x = (sup T - θ)/ς`, or
/// `φ(x)/(1 - Φ(x))` with `x = (inf T - θ)/ς`. When both ends are finite the
/// larger of the two bounds is returned.
pub fn quantile_floor(theta: f64, var: f64, set: &IntervalUnion, kappa: f64, alpha: f64) -> Result<f64> {
    if !set.bounded_above() && !set.bounded_below() {
        return Err(domain!("quantile floor needs T bounded on at least one side, got {set}"));
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(domain!("kappa must lie in (0, 1), got {kappa}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain!("alpha must lie in (0, 1), got {alpha}"));
    }
    let sd = libm::sqrt(var);
    let mut ratio: f64 = 0.0;
    if set.bounded_above() {
        let x = (set.upper() - theta) / sd;
        ratio = ratio.max(libm::exp(normal::log_pdf(x) - normal::log_cdf(x)));
    }
    if set.bounded_below() {
        let x = (set.lower() - theta) / sd;
        ratio = ratio.max(libm::exp(normal::log_pdf(x) - normal::log_sf(x)));
    }
    Ok(sd * libm::log((2.0 - alpha) / alpha) / (1.0 - kappa) * ratio)
}
