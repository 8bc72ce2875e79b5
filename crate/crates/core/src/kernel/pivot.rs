use super::interval::IntervalUnion;
use super::truncated::{cdf_located, CLAMP_INSET, CLAMP_TOL};
use crate::error::{domain, Result};
use crate::roots::{BracketBisect, Monotone};

/// Initial bracket half-width, in standard deviations.
const BRACKET_HALF_WIDTH: f64 = 4.0;

/// `Q_γ(w)`: the location `θ` at which the truncated CDF at `w` equals `gamma`.
///
/// The truncated CDF at fixed `w ∈ T` is strictly decreasing in `θ`, so the
/// root is unique; it is bracketed by doubling a window around `w` and then
/// bisected until the CDF matches to 1e-12 or the bracket collapses to float
/// resolution.
pub fn solve_location(set: &IntervalUnion, var: f64, w: f64, gamma: f64) -> Result<f64> {
    if !(var > 0.0 && var.is_finite()) {
        return Err(domain!("variance must be positive and finite, got {var}"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain!("level must lie in (0, 1), got {gamma}"));
    }
    let sd = libm::sqrt(var);
    let (k, w) = set.clamp(w, CLAMP_TOL * sd, CLAMP_INSET * sd)?;
    let solver = BracketBisect::new(BRACKET_HALF_WIDTH * sd, 1e-13 * sd * w.abs().max(1.0));
    solver.solve(
        |theta| cdf_located(set, theta, sd, k, w),
        gamma,
        w,
        Monotone::Decreasing,
    )
}

/// Endpoints `(L, U)` of the interval obtained by inverting the truncated
/// Gaussian pivot with lower tail `alpha1` and upper tail `alpha2`:
/// `L = Q_{1-alpha1}(w)`, `U = Q_{alpha2}(w)`.
pub fn ci_location(
    set: &IntervalUnion,
    var: f64,
    w: f64,
    alpha1: f64,
    alpha2: f64,
) -> Result<(f64, f64)> {
    for a in [alpha1, alpha2] {
        if !(a > 0.0 && a <= 0.5) {
            return Err(domain!("tail probabilities must lie in (0, 1/2], got {a}"));
        }
    }
    let lower = solve_location(set, var, w, 1.0 - alpha1)?;
    let upper = solve_location(set, var, w, alpha2)?;
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::normal;
    use alloc::vec;

    #[test]
    fn untruncated_location_is_shifted_quantile() {
        let t = IntervalUnion::real_line();
        for &(w, var, gamma) in &[(0.0, 1.0, 0.975), (3.5, 4.0, 0.1), (-10.0, 0.25, 0.5)] {
            let q = solve_location(&t, var, w, gamma).unwrap();
            let expected = w - var.sqrt() * normal::quantile(gamma);
            assert!((q - expected).abs() < 1e-9, "{q} vs {expected}");
        }
        let (l, u) = ci_location(&t, 1.0, 0.7, 0.025, 0.025).unwrap();
        assert!((l - (0.7 - 1.959_963_984_540_054)).abs() < 1e-9);
        assert!((u - (0.7 + 1.959_963_984_540_054)).abs() < 1e-9);
    }

    #[test]
    fn symmetric_set_median_location() {
        let t = IntervalUnion::interval(-3.0, 3.0).unwrap();
        assert!(solve_location(&t, 1.0, 0.0, 0.5).unwrap().abs() < 1e-9);
    }

    #[test]
    fn monotone_in_level_and_point() {
        let t = IntervalUnion::new(vec![(-3.0, -2.0), (-1.0, 1.0), (2.0, 3.0)]).unwrap();
        let q1 = solve_location(&t, 1.0, 0.5, 0.2).unwrap();
        let q2 = solve_location(&t, 1.0, 0.5, 0.8).unwrap();
        assert!(q1 > q2);
        let q3 = solve_location(&t, 1.0, 2.5, 0.2).unwrap();
        assert!(q3 > q1);
    }

    #[test]
    fn rejects_bad_levels() {
        let t = IntervalUnion::real_line();
        assert!(solve_location(&t, 1.0, 0.0, 1.0).is_err());
        assert!(ci_location(&t, 1.0, 0.0, 0.6, 0.025).is_err());
        assert!(solve_location(&t, 0.0, 0.0, 0.5).is_err());
    }
}
