//! Standard normal special functions with tail-safe logarithms.
//!
//! Beyond |x| = 8 the log-probabilities are evaluated through the Mills ratio
//! `Φ(-x)/φ(x)` (a continued fraction) rather than `ln(erfc)`, which keeps
//! them finite and accurate far past the point where `Φ` itself underflows.

use core::f64::consts::{FRAC_1_SQRT_2, LN_2};

/// `ln(sqrt(2π))`.
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standardized distance beyond which tail evaluation switches to the Mills ratio.
pub const TAIL_SWITCH: f64 = 8.0;

/// Standard normal density φ(x).
#[inline]
pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * libm::exp(-0.5 * x * x)
}

#[inline]
pub fn log_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Standard normal CDF Φ(x).
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail Φ(-x) = 1 - Φ(x), accurate for large positive `x`.
#[inline]
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Mills ratio `Φ(-t)/φ(t)` for `t >= TAIL_SWITCH`, by backward evaluation of
/// the continued fraction `1/(t + 1/(t + 2/(t + 3/(t + ...))))`.
pub fn mills_ratio(t: f64) -> f64 {
    debug_assert!(t >= TAIL_SWITCH - 1e-12);
    if t.is_infinite() {
        return 0.0;
    }
    // depth chosen so that the truncation error is below one ulp at t = 8
    let depth = if t < 12.0 { 60 } else if t < 30.0 { 30 } else { 12 };
    let mut f = t;
    for k in (1..=depth).rev() {
        f = t + k as f64 / f;
    }
    1.0 / f
}

/// `ln Φ(x)`, finite for every finite `x`.
pub fn log_cdf(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if x < -TAIL_SWITCH {
        log_pdf(x) + libm::log(mills_ratio(-x))
    } else if x < 0.0 {
        libm::log(cdf(x))
    } else {
        libm::log1p(-sf(x))
    }
}

/// `ln Φ(-x)`.
#[inline]
pub fn log_sf(x: f64) -> f64 {
    log_cdf(-x)
}

/// `ln(1 - e^d)` for `d <= 0`.
#[inline]
pub fn log1m_exp(d: f64) -> f64 {
    if d > -LN_2 {
        libm::log(-libm::expm1(d))
    } else {
        libm::log1p(-libm::exp(d))
    }
}

/// `ln(Σ e^{x_i})`; `-∞` for an empty or all `-∞` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = xs.iter().map(|&x| libm::exp(x - max)).sum();
    max + libm::log(sum)
}

/// `ln(Φ(beta) - Φ(alpha))` for standardized endpoints `alpha < beta`.
///
/// `width` is `beta - alpha` computed by the caller from unstandardized
/// endpoints; in the far tails it replaces the difference of the two squared
/// endpoints, which would otherwise cancel catastrophically.
pub fn log_mass_std(alpha: f64, beta: f64, width: f64) -> f64 {
    debug_assert!(alpha < beta || (alpha == beta && width == 0.0));
    if alpha >= 0.0 {
        // Φ(-alpha) - Φ(-beta)
        let la = log_sf(alpha);
        let diff = if alpha > TAIL_SWITCH && beta.is_finite() && width.is_finite() {
            -0.5 * width * (alpha + beta) + libm::log(mills_ratio(beta) / mills_ratio(alpha))
        } else {
            log_sf(beta) - la
        };
        la + log1m_exp(diff.min(0.0))
    } else if beta <= 0.0 {
        // Φ(beta) - Φ(alpha)
        let lb = log_cdf(beta);
        let diff = if beta < -TAIL_SWITCH && alpha.is_finite() && width.is_finite() {
            -0.5 * width * (-alpha - beta) + libm::log(mills_ratio(-alpha) / mills_ratio(-beta))
        } else {
            log_cdf(alpha) - lb
        };
        lb + log1m_exp(diff.min(0.0))
    } else {
        libm::log1p(-(cdf(alpha) + sf(beta)))
    }
}

// Wichura (1988), algorithm AS 241, PPND16.
const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

#[inline]
fn poly(c: &[f64; 8], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Standard normal quantile Φ⁻¹(p) for `p` in `(0, 1)`; `±∞` at the ends and
/// NaN outside `[0, 1]`.
pub fn quantile(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let x = tail_quantile(libm::log(r));
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Upper quantile: the `x` with Φ(-x) = q, accurate for tiny `q`.
#[inline]
pub fn quantile_upper(q: f64) -> f64 {
    -quantile(q)
}

/// Positive `x` with `ln Φ(-x) = log_q`, for `log_q <= ln(0.075)`.
fn tail_quantile(log_q: f64) -> f64 {
    let r = libm::sqrt(-log_q);
    if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    }
}

/// Φ⁻¹ evaluated from `ln p`, usable where `p` itself underflows.
pub fn quantile_from_log(log_p: f64) -> f64 {
    if log_p >= 0.0 {
        return if log_p == 0.0 { f64::INFINITY } else { f64::NAN };
    }
    if log_p > -700.0 {
        return quantile(libm::exp(log_p));
    }
    // deep lower tail: polish the AS 241 tail branch with Newton on ln Φ
    let mut x = -tail_quantile(log_p);
    for _ in 0..50 {
        let f = log_cdf(x) - log_p;
        // d/dx ln Φ(x) = 1 / mills_ratio(-x) in the deep tail
        let step = f * mills_ratio(-x);
        x -= step;
        if step.abs() <= 1e-15 * x.abs() {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        assert!((cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-15);
        assert!((sf(8.0) - 6.220_960_574_271_785e-16).abs() < 1e-28);
    }

    #[test]
    fn mills_ratio_reference_values() {
        // (1 - Φ(t)) / φ(t) at 40 digits
        let refs = [
            (8.0, 0.123_131_963_257_932_296),
            (8.56, 0.115_289_299_642_463_413),
            (10.0, 0.099_028_596_471_731_921),
            (15.0, 0.066_374_235_823_250_174),
            (25.0, 0.039_936_304_769_535_593),
            (40.0, 0.024_984_404_205_720_571),
            (100.0, 0.009_999_000_299_850_105),
        ];
        for (t, r) in refs {
            let cf = mills_ratio(t);
            assert!((cf / r - 1.0).abs() < 2e-15, "t={t} {cf} {r}");
        }
    }

    #[test]
    fn log_cdf_is_continuous_at_switch() {
        let below = log_cdf(-TAIL_SWITCH - 1e-12);
        let above = log_cdf(-TAIL_SWITCH + 1e-12);
        assert!((below - above).abs() < 1e-10);
        // far tail stays finite
        let far = log_cdf(-1e4);
        assert!(far.is_finite() && far < -4.9e7);
    }

    #[test]
    fn quantile_reference_values() {
        assert!((quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
        assert!((quantile(0.5)).abs() < 1e-16);
        assert!((quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-12);
        assert!((quantile_upper(1e-300) - 37.047_096_299_361_2).abs() < 1e-9);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let x = quantile(p);
            assert!((cdf(x) - p).abs() < 2e-16 * 8.0, "p={p}");
        }
        for e in 2..300 {
            let p = libm::pow(10.0, -(e as f64));
            let x = quantile(p);
            // relative sensitivity of Φ near x is about |x| dx, dx a few ulps
            let tol = 4.0 * x * x * f64::EPSILON + 1e-14;
            assert!((cdf(x) / p - 1.0).abs() < tol, "p=1e-{e}");
        }
    }

    #[test]
    fn quantile_from_log_deep_tail() {
        let x = -45.0;
        let lp = log_cdf(x);
        assert!((quantile_from_log(lp) - x).abs() < 1e-10);
        let x = -8.5;
        assert!((quantile_from_log(log_cdf(x)) - x).abs() < 1e-12);
    }

    #[test]
    fn log_mass_far_tail_interval() {
        // Φ(-8) - Φ(-9)
        let lm = log_mass_std(8.0, 9.0, 1.0);
        let expected = (sf(8.0) - sf(9.0)).ln();
        assert!((lm - expected).abs() < 1e-12);
        // symmetric version
        let lm2 = log_mass_std(-9.0, -8.0, 1.0);
        assert!((lm - lm2).abs() < 1e-13);
    }
}
