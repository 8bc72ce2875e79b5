//! Summary statistics for simulation output.

use polysel_core::linalg::{Matrix, Qr};

use crate::error::{config_err, Result};

/// Linearly interpolated empirical quantile of sorted data.
pub fn empirical_quantile(sorted: &[f64], kappa: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    assert!((0.0..=1.0).contains(&kappa), "kappa must lie in [0, 1]");
    let h = (sorted.len() - 1) as f64 * kappa;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Least-squares fit of `q ≈ (a + bκ)/(1 - κ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReciprocalFit {
    pub a: f64,
    pub b: f64,
    pub se_a: f64,
    pub se_b: f64,
    pub r_squared: f64,
}

impl ReciprocalFit {
    pub fn eval(&self, kappa: f64) -> f64 {
        (self.a + self.b * kappa) / (1.0 - kappa)
    }
}

pub fn fit_reciprocal_curve(points: &[(f64, f64)]) -> Result<ReciprocalFit> {
    if points.len() < 3 {
        return Err(config_err(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(k, q)) = points.iter().find(|(k, q)| !(*k > 0.0 && *k < 1.0) || !q.is_finite()) {
        return Err(config_err(format!("invalid point ({k}, {q}); kappa must lie in (0, 1)")));
    }
    let u: Vec<f64> = points.iter().map(|(k, _)| 1.0 / (1.0 - k)).collect();
    let v: Vec<f64> = points.iter().map(|(k, _)| k / (1.0 - k)).collect();
    let q: Vec<f64> = points.iter().map(|(_, q)| *q).collect();
    let design = Matrix::from_columns(&[u, v])?;
    let qr = Qr::new(&design).map_err(|_| config_err("degenerate design: all kappa values are equal"))?;
    let coef = qr.least_squares(&q);
    let resid = qr.residual(&q);
    let ss_res: f64 = resid.iter().map(|r| r * r).sum();
    let mean = q.iter().sum::<f64>() / q.len() as f64;
    let ss_tot: f64 = q.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    let dof = (points.len() - 2) as f64;
    let cov = qr.gram_inverse();
    let s2 = ss_res / dof;
    Ok(ReciprocalFit {
        a: coef[0],
        b: coef[1],
        se_a: (s2 * cov.get(0, 0)).sqrt(),
        se_b: (s2 * cov.get(1, 1)).sqrt(),
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_interpolates() {
        let d = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(empirical_quantile(&d, 0.0), 1.0);
        assert_eq!(empirical_quantile(&d, 1.0), 5.0);
        assert_eq!(empirical_quantile(&d, 0.5), 3.0);
        assert!((empirical_quantile(&d, 0.1) - 1.4).abs() < 1e-15);
    }

    #[test]
    fn exact_curve_is_recovered() {
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|i| {
                let k = 0.5 + 0.05 * i as f64;
                (k, (2.0 + 3.0 * k) / (1.0 - k))
            })
            .collect();
        let f = fit_reciprocal_curve(&pts).unwrap();
        assert!((f.a - 2.0).abs() < 1e-10 && (f.b - 3.0).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_kappas_are_rejected() {
        assert!(fit_reciprocal_curve(&[(0.5, 1.0), (0.5, 2.0), (0.5, 3.0)]).is_err());
        assert!(fit_reciprocal_curve(&[(0.5, 1.0), (0.6, 2.0)]).is_err());
    }
}
