use alloc::vec::Vec;

use super::interval::IntervalUnion;
use super::normal::{self, log1m_exp, log_mass_std, mills_ratio, TAIL_SWITCH};
use crate::error::{domain, Result};

/// Points within this many standard deviations of the closure of `T` are
/// clamped into `T`.
pub const CLAMP_TOL: f64 = 1e-9;
/// Distance (in standard deviations) inside `T` at which clamped points land.
pub const CLAMP_INSET: f64 = 1e-12;

/// `ln P(a < N(theta, sd²) < b)`.
///
/// Far-tail intervals are evaluated through the Mills ratio, so the result
/// stays finite whenever the true mass is positive and representable in log
/// space.
pub fn log_gauss_mass(a: f64, b: f64, theta: f64, sd: f64) -> Result<f64> {
    if a.is_nan() || b.is_nan() || !(a < b) {
        return Err(domain!("log_gauss_mass needs a < b, got ({a}, {b})"));
    }
    if !(sd > 0.0 && sd.is_finite()) || !theta.is_finite() {
        return Err(domain!("log_gauss_mass needs finite theta and sd > 0"));
    }
    Ok(log_mass_std((a - theta) / sd, (b - theta) / sd, (b - a) / sd))
}

/// The law of `N(theta, var)` conditioned to lie in a union of open intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedGaussian {
    theta: f64,
    var: f64,
    sd: f64,
    set: IntervalUnion,
}

impl TruncatedGaussian {
    pub fn new(theta: f64, var: f64, set: IntervalUnion) -> Result<Self> {
        if !theta.is_finite() {
            return Err(domain!("location must be finite, got {theta}"));
        }
        if !(var > 0.0 && var.is_finite()) {
            return Err(domain!("variance must be positive and finite, got {var}"));
        }
        Ok(Self {
            theta,
            var,
            sd: libm::sqrt(var),
            set,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn var(&self) -> f64 {
        self.var
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn set(&self) -> &IntervalUnion {
        &self.set
    }

    /// `ln P(N(theta, var) ∈ T)`.
    pub fn log_mass(&self) -> f64 {
        piece_log_masses(&self.set, self.theta, self.sd)
            .into_iter()
            .fold(LogAcc::new(), |mut acc, x| {
                acc.add(x);
                acc
            })
            .value()
    }

    /// `F(w) = P(W <= w)`. `w` must lie in the closure of `T`, up to the
    /// clamping tolerance.
    pub fn cdf(&self, w: f64) -> Result<f64> {
        let (k, w) = self
            .set
            .clamp(w, CLAMP_TOL * self.sd, CLAMP_INSET * self.sd)?;
        Ok(cdf_located(&self.set, self.theta, self.sd, k, w))
    }

    /// Density; zero outside `T`.
    pub fn pdf(&self, w: f64) -> f64 {
        if !self.set.contains(w) {
            return 0.0;
        }
        let x = (w - self.theta) / self.sd;
        libm::exp(normal::log_pdf(x) - libm::log(self.sd) - self.log_mass())
    }

    /// The `w ∈ T` with `F(w) = p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain!("quantile level must lie in (0, 1), got {p}"));
        }
        let (lo_side, log_masses) = if self.upper_regime() {
            (true, piece_log_masses(&self.set.reflect(), -self.theta, self.sd))
        } else {
            (false, piece_log_masses(&self.set, self.theta, self.sd))
        };
        // in the upper regime work with the reflected law at level 1 - p
        let (set, theta, level) = if lo_side {
            (self.set.reflect(), -self.theta, 1.0 - p)
        } else {
            (self.set.clone(), self.theta, p)
        };
        let w = quantile_in(&set, theta, self.sd, &log_masses, level);
        Ok(if lo_side { -w } else { w })
    }

    /// Inverse-CDF draw from a uniform variate `u ∈ (0, 1)`.
    pub fn sample(&self, u: f64) -> Result<f64> {
        self.quantile(u)
    }

    fn upper_regime(&self) -> bool {
        upper_regime(&self.set, self.theta, self.sd)
    }
}

/// The whole set lies at least `TAIL_SWITCH` standard deviations above theta.
fn upper_regime(set: &IntervalUnion, theta: f64, sd: f64) -> bool {
    let a = set.lower();
    a.is_finite() && (a - theta) / sd >= TAIL_SWITCH
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogAcc {
    max: f64,
    sum: f64,
}

impl LogAcc {
    pub(crate) fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub(crate) fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.sum = self.sum * libm::exp(self.max - x) + 1.0;
            self.max = x;
        } else {
            self.sum += libm::exp(x - self.max);
        }
    }

    pub(crate) fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            self.max
        } else {
            self.max + libm::log(self.sum)
        }
    }
}

/// Log-masses of sub-intervals of `T` measured on a common scale.
///
/// When all of `T` sits far below `theta`, masses are expressed relative to
/// `φ` at the top endpoint: squared standardized endpoints of order 1e12 would
/// otherwise lose every significant digit when differenced.
#[derive(Debug, Clone, Copy)]
struct MassScale {
    theta: f64,
    sd: f64,
    /// Top endpoint `b_K` and its standardized value, when anchored.
    anchor: Option<(f64, f64)>,
}

impl MassScale {
    fn new(set: &IntervalUnion, theta: f64, sd: f64) -> Self {
        let top = set.upper();
        let x0 = (top - theta) / sd;
        let anchor = (top.is_finite() && x0 <= -TAIL_SWITCH).then_some((top, x0));
        Self { theta, sd, anchor }
    }

    /// Log-mass of `(a, b)`, possibly shifted by a constant common to all calls.
    fn log_mass(&self, a: f64, b: f64) -> f64 {
        let xa = (a - self.theta) / self.sd;
        let xb = (b - self.theta) / self.sd;
        let width = (b - a) / self.sd;
        match self.anchor {
            None => log_mass_std(xa, xb, width),
            Some((top, x0)) => {
                // ln Φ(xb) minus the common offset ln φ(x0)
                let lb = -0.5 * ((b - top) / self.sd) * (xb + x0) + libm::log(mills_ratio(-xb));
                if a == f64::NEG_INFINITY {
                    return lb;
                }
                let diff = 0.5 * width * (xa + xb)
                    + libm::log(mills_ratio(-xa) / mills_ratio(-xb));
                lb + log1m_exp(diff.min(0.0))
            }
        }
    }
}

fn piece_log_masses(set: &IntervalUnion, theta: f64, sd: f64) -> Vec<f64> {
    let scale = MassScale::new(set, theta, sd);
    set.pieces()
        .iter()
        .map(|&(a, b)| scale.log_mass(a, b))
        .collect()
}

/// CDF at a point `w` known to lie in piece `k` of `set`.
pub(crate) fn cdf_located(set: &IntervalUnion, theta: f64, sd: f64, k: usize, w: f64) -> f64 {
    if upper_regime(set, theta, sd) {
        let reflected = set.reflect();
        let kr = set.len() - 1 - k;
        1.0 - cdf_lower(&reflected, -theta, sd, kr, -w)
    } else {
        cdf_lower(set, theta, sd, k, w)
    }
}

fn cdf_lower(set: &IntervalUnion, theta: f64, sd: f64, k: usize, w: f64) -> f64 {
    let scale = MassScale::new(set, theta, sd);
    let mut num = LogAcc::new();
    let mut den = LogAcc::new();
    for (i, &(a, b)) in set.pieces().iter().enumerate() {
        let m = scale.log_mass(a, b);
        den.add(m);
        if i < k {
            num.add(m);
        } else if i == k && w > a {
            num.add(scale.log_mass(a, w));
        }
    }
    let f = libm::exp(num.value() - den.value());
    f.clamp(0.0, 1.0)
}

/// Quantile of `TN(theta, sd², set)` at level `p`, given per-piece log masses.
fn quantile_in(set: &IntervalUnion, theta: f64, sd: f64, log_masses: &[f64], p: f64) -> f64 {
    let total = log_masses.iter().fold(LogAcc::new(), |mut acc, &x| {
        acc.add(x);
        acc
    });
    let total = total.value();
    let probs: Vec<f64> = log_masses.iter().map(|&m| libm::exp(m - total)).collect();

    let last = probs.len() - 1;
    let mut before = 0.0;
    let mut k = last;
    for (i, &pr) in probs.iter().enumerate() {
        if p <= before + pr || i == last {
            k = i;
            break;
        }
        before += pr;
    }
    let (a, b) = set.pieces()[k];
    let u = if probs[k] > 0.0 {
        ((p - before) / probs[k]).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
    } else {
        0.5
    };

    let guess = local_guess(a, b, theta, sd, u);
    polish(set, theta, sd, k, p, guess)
}

/// Closed-form inversion inside one piece: the `w` that leaves a fraction `u`
/// of the piece's normal mass to its left.
fn local_guess(a: f64, b: f64, theta: f64, sd: f64, u: f64) -> f64 {
    let alpha = (a - theta) / sd;
    let beta = (b - theta) / sd;
    let x = if alpha >= 0.0 {
        // upper tail: Φ(-x) = Φ(-alpha) - u (Φ(-alpha) - Φ(-beta))
        let la = normal::log_sf(alpha);
        let lb = normal::log_sf(beta);
        let d = (lb - la).min(0.0);
        let lq = la + libm::log1p(-u * -libm::expm1(d));
        -normal::quantile_from_log(lq)
    } else if beta <= 0.0 {
        // Φ(x) = Φ(beta) (u + (1 - u) e^{d}), d = ln Φ(alpha) - ln Φ(beta)
        let la = normal::log_cdf(alpha);
        let lb = normal::log_cdf(beta);
        let d = (la - lb).min(0.0);
        let lp = lb + libm::log(u + (1.0 - u) * libm::exp(d));
        normal::quantile_from_log(lp)
    } else {
        let mass = 1.0 - normal::cdf(alpha) - normal::sf(beta);
        let c = normal::cdf(alpha) + u * mass;
        if c <= 0.5 {
            normal::quantile(c)
        } else {
            normal::quantile_upper(normal::sf(beta) + (1.0 - u) * mass)
        }
    };
    theta + sd * x
}

/// Safeguarded Newton/bisection on the CDF within piece `k`.
fn polish(set: &IntervalUnion, theta: f64, sd: f64, k: usize, p: f64, guess: f64) -> f64 {
    let (a, b) = set.pieces()[k];
    let f = |w: f64| cdf_lower(set, theta, sd, k, w) - p;

    let mut w = if guess.is_finite() && guess > a && guess < b {
        guess
    } else if a.is_finite() && b.is_finite() {
        a + 0.5 * (b - a)
    } else if a.is_finite() {
        a + sd
    } else {
        b - sd
    };

    // finite bracket [lo, hi] around the root
    let mut lo = a;
    let mut hi = b;
    if !lo.is_finite() {
        let mut step = sd;
        lo = w - step;
        while f(lo) > 0.0 {
            step *= 2.0;
            lo = w - step;
        }
    }
    if !hi.is_finite() {
        let mut step = sd;
        hi = w + step;
        while f(hi) < 0.0 {
            step *= 2.0;
            hi = w + step;
        }
    }

    let log_total = {
        let scale = MassScale::new(set, theta, sd);
        set.pieces().iter().fold(LogAcc::new(), |mut acc, &(pa, pb)| {
            acc.add(scale.log_mass(pa, pb));
            acc
        })
    }
    .value();
    let anchored = MassScale::new(set, theta, sd).anchor;
    let density = |w: f64| {
        let x = (w - theta) / sd;
        let log_phi = match anchored {
            // matches the offset used by the anchored masses
            Some((top, x0)) => -0.5 * ((w - top) / sd) * (x + x0),
            None => normal::log_pdf(x),
        };
        libm::exp(log_phi - libm::log(sd) - log_total)
    };

    for _ in 0..100 {
        let fw = f(w);
        if fw.abs() <= 1e-15 {
            return w;
        }
        if fw < 0.0 {
            lo = lo.max(w);
        } else {
            hi = hi.min(w);
        }
        let dens = density(w);
        let mut next = w - fw / dens;
        if !(next.is_finite() && next > lo && next < hi) {
            next = lo + 0.5 * (hi - lo);
        }
        if (next - w).abs() <= 4.0 * f64::EPSILON * w.abs().max(sd) || hi - lo <= f64::EPSILON * w.abs() {
            return next;
        }
        w = next;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const INF: f64 = f64::INFINITY;

    fn three_pieces() -> IntervalUnion {
        IntervalUnion::new(vec![(-3.0, -2.0), (-1.0, 1.0), (2.0, 3.0)]).unwrap()
    }

    #[test]
    fn log_gauss_mass_examples() {
        assert_eq!(log_gauss_mass(-INF, INF, 0.0, 1.0).unwrap(), 0.0);
        assert!((log_gauss_mass(0.0, INF, 0.0, 1.0).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        // mpmath: ln(Φ(-8) - Φ(-9)) = -35.01361859343714811
        let lm = log_gauss_mass(8.0, 9.0, 0.0, 1.0).unwrap();
        assert!((lm.exp() / 6.219_831_985_865_830e-16 - 1.0).abs() < 1e-10);
        assert!(log_gauss_mass(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(log_gauss_mass(2.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn log_gauss_mass_deep_tail_is_finite() {
        let lm = log_gauss_mass(39.0, 40.0, 0.0, 1.0).unwrap();
        assert!(lm.is_finite() && lm < -700.0);
        let lm = log_gauss_mass(-1e6 - 1.0, -1e6, 0.0, 1.0).unwrap();
        assert!(lm.is_finite());
    }

    #[test]
    fn cdf_examples() {
        let d = TruncatedGaussian::new(0.0, 1.0, IntervalUnion::real_line()).unwrap();
        assert!((d.cdf(0.0).unwrap() - 0.5).abs() < 1e-16);
        let d = TruncatedGaussian::new(0.0, 1.0, three_pieces()).unwrap();
        // mpmath value of (Φ(1)-Φ(-1)+Φ(-2)-Φ(-3)) / (Φ(1)-Φ(-1)+2(Φ(3)-Φ(2)))
        assert!((d.cdf(1.0).unwrap() - 0.970_502_370_677_288_8).abs() < 1e-12);
        assert!(d.cdf(1.5).is_err());
    }

    #[test]
    fn pdf_examples() {
        let d = TruncatedGaussian::new(0.0, 1.0, IntervalUnion::real_line()).unwrap();
        assert!((d.pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        let half = TruncatedGaussian::new(0.0, 1.0, IntervalUnion::interval(0.0, INF).unwrap()).unwrap();
        assert!((half.pdf(1.0) - 0.483_941_449_038_286_7).abs() < 1e-15);
        assert_eq!(half.pdf(-1.0), 0.0);
    }

    #[test]
    fn quantile_examples() {
        let d = TruncatedGaussian::new(0.0, 1.0, IntervalUnion::real_line()).unwrap();
        assert!((d.quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-13);
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
        let shifted = TruncatedGaussian::new(3.0, 4.0, IntervalUnion::real_line()).unwrap();
        assert_eq!(shifted.sample(0.5).unwrap(), 3.0);
    }

    #[test]
    fn quantile_near_one_follows_boundary_density() {
        // (1 - q(p)) / (1 - p) -> (Φ(1) - Φ(0)) / φ(1) on T = (0, 1)
        let d = TruncatedGaussian::new(0.0, 1.0, IntervalUnion::interval(0.0, 1.0).unwrap()).unwrap();
        let slope = (normal::cdf(1.0) - 0.5) / normal::pdf(1.0);
        let mut prev_err = f64::INFINITY;
        for j in 2..8 {
            let eps = libm::pow(10.0, -(j as f64));
            let q = d.quantile(1.0 - eps).unwrap();
            let ratio = (1.0 - q) / eps;
            let err = (ratio / slope - 1.0).abs();
            assert!(err < prev_err + 1e-9);
            prev_err = err;
        }
        assert!(prev_err < 1e-6);
    }

    #[test]
    fn far_tail_quantile_round_trip() {
        let d = TruncatedGaussian::new(0.0, 1.0, IntervalUnion::interval(40.0, 41.0).unwrap()).unwrap();
        for &p in &[1e-6, 0.3, 0.9, 0.999999] {
            let w = d.quantile(p).unwrap();
            assert!(w > 40.0 && w < 41.0);
            assert!((d.cdf(w).unwrap() - p).abs() < 1e-10, "p={p}");
        }
        let d = TruncatedGaussian::new(1e5, 1.0, three_pieces()).unwrap();
        let w = d.quantile(0.5).unwrap();
        assert!((d.cdf(w).unwrap() - 0.5).abs() < 1e-10);
        assert!(w > 2.0 && w < 3.0);
    }
}
