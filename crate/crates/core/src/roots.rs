//! Derivative-free solvers for monotone equations and unimodal minimization.

use alloc::string::String;

use crate::error::{Error, Result};

/// Direction of a monotone function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotone {
    Increasing,
    Decreasing,
}

/// Solves `f(x) = target` for a monotone `f` by expanding a bracket
/// geometrically around `center` and then bisecting.
#[derive(Debug, Clone, Copy)]
pub struct BracketBisect {
    /// Starting half-width of the bracket.
    pub half_width: f64,
    /// Maximum number of half-width doublings.
    pub max_expansions: usize,
    /// Stop when `|f(x) - target|` falls below this.
    pub f_tol: f64,
    /// Stop when the bracket is narrower than this.
    pub x_tol: f64,
}

impl BracketBisect {
    pub fn new(half_width: f64, x_tol: f64) -> Self {
        Self {
            half_width,
            max_expansions: 200,
            f_tol: 1e-12,
            x_tol,
        }
    }

    pub fn solve<F>(&self, mut f: F, target: f64, center: f64, dir: Monotone) -> Result<f64>
    where
        F: FnMut(f64) -> f64,
    {
        // g(x) = f(x) - target, made increasing
        let sign = match dir {
            Monotone::Increasing => 1.0,
            Monotone::Decreasing => -1.0,
        };
        let mut g = |x: f64| sign * (f(x) - target);

        let fail = |steps: usize, msg: &str| Error::Bracket {
            steps,
            target,
            anchor: center,
            context: String::from(msg),
        };

        let mut lo_width = self.half_width;
        let mut hi_width = self.half_width;
        let mut lo = center - lo_width;
        let mut hi = center + hi_width;
        let mut g_lo = g(lo);
        let mut g_hi = g(hi);
        let mut steps = 0;
        while g_lo > 0.0 {
            if steps >= self.max_expansions {
                return Err(fail(steps, "lower end never dropped below target"));
            }
            hi = lo;
            g_hi = g_lo;
            lo_width *= 2.0;
            lo = center - lo_width;
            g_lo = g(lo);
            steps += 1;
        }
        while g_hi < 0.0 {
            if steps >= self.max_expansions {
                return Err(fail(steps, "upper end never rose above target"));
            }
            lo = hi;
            g_lo = g_hi;
            hi_width *= 2.0;
            hi = center + hi_width;
            g_hi = g(hi);
            steps += 1;
        }
        if g_lo.is_nan() || g_hi.is_nan() {
            return Err(fail(steps, "function returned NaN"));
        }
        if g_lo == 0.0 {
            return Ok(lo);
        }
        if g_hi == 0.0 {
            return Ok(hi);
        }

        loop {
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi || hi - lo <= self.x_tol {
                return Ok(mid);
            }
            let g_mid = g(mid);
            if g_mid.is_nan() {
                return Err(fail(steps, "function returned NaN inside bracket"));
            }
            if g_mid.abs() <= self.f_tol {
                return Ok(mid);
            }
            if g_mid < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
}

/// Minimizes a unimodal `f` on `[a, b]` by golden-section search; returns
/// `(argmin, min)`.
pub fn golden_section_min<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best })
}
