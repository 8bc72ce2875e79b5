use polysel_core::inference::{Level, Selected, Target};
use rayon::prelude::*;
use serde::Serialize;

use super::draw_fit;
use crate::config::{BetaPattern, QuantileSpec, ScenarioConfig};
use crate::error::{config_err, Result};
use crate::sim::{derive_seed, make_design, substream};
use crate::stats::{empirical_quantile, fit_reciprocal_curve, ReciprocalFit};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileRow {
    pub norm_label: String,
    pub kappa: f64,
    pub quantile: f64,
    pub fit_a: f64,
    pub fit_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileRecord {
    pub norm_label: String,
    pub rep: usize,
    pub model_size: usize,
    pub conditioning: &'static str,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub length: Option<f64>,
    pub redraws: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormSummary {
    pub label: String,
    pub norm: f64,
    /// Replications with a nonempty model.
    pub accepted: usize,
    pub empty_models: usize,
    /// Replications where the sign-conditional interval stood in.
    pub fallbacks: usize,
    pub fit: ReciprocalFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileOutput {
    pub rows: Vec<QuantileRow>,
    pub summaries: Vec<NormSummary>,
    pub records: Vec<QuantileRecord>,
}

fn default_norms(p: usize) -> Vec<(String, f64)> {
    let top = (p as f64 / 2.0).sqrt();
    vec![
        ("0".to_owned(), 0.0),
        ("sqrt(p/2)/10".to_owned(), top / 10.0),
        ("sqrt(p/2)".to_owned(), top),
    ]
}

/// Quantiles of the model-conditional interval length for the first selected
/// coefficient, with `β ∝ (1, 0, 1, 0, ...)` at several norms.
///
/// All norms share the design and the noise draws.
pub fn run_quantile_study(base: &ScenarioConfig, spec: &QuantileSpec) -> Result<QuantileOutput> {
    base.validate()?;
    if spec.kappas.iter().any(|k| !(*k > 0.0 && *k < 1.0)) {
        return Err(config_err("quantile levels must lie in (0, 1)"));
    }
    let norms = match &spec.norms {
        None => default_norms(base.p),
        Some(v) => v.iter().map(|&s| (format!("{s}"), s)).collect(),
    };
    if norms.iter().any(|(_, s)| !(*s >= 0.0 && s.is_finite())) {
        return Err(config_err("norms must be finite and nonnegative"));
    }
    let level = Level::two_sided(base.alpha)?;
    let x = make_design(base.n, base.p, base.rho, derive_seed(base.seed, "quantiles/design"));
    let noise_seed = derive_seed(base.seed, "quantiles/noise");
    let nonzero = base.p.div_ceil(2) as f64;

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut records = Vec::new();
    for (label, norm) in norms {
        let beta = BetaPattern::Alternating {
            scale: norm / nonzero.sqrt(),
        }
        .coefficients(base.n, base.p);
        let mu = x.mul_vec(&beta);
        let recs: Vec<QuantileRecord> = (0..base.reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = substream(noise_seed, rep as u64);
                let draw = draw_fit(&x, &mu, 1.0, base.lambda, &mut rng)?;
                let model_size = draw.fit.model.len();
                let mut rec = QuantileRecord {
                    norm_label: label.clone(),
                    rep,
                    model_size,
                    conditioning: "empty_model",
                    lower: None,
                    upper: None,
                    length: None,
                    redraws: draw.redraws,
                };
                if model_size > 0 {
                    let sel = Selected::from_fit(&x, &draw.y, base.lambda, draw.fit)?;
                    let ci = sel.ci_given_model(&Target::Position(0), 1.0, level, base.cap, 0.5)?;
                    rec.conditioning = ci.conditioning.label();
                    rec.lower = Some(ci.lower);
                    rec.upper = Some(ci.upper);
                    rec.length = Some(ci.length());
                }
                Ok(rec)
            })
            .collect::<Result<_>>()?;

        let mut lengths: Vec<f64> = recs.iter().filter_map(|r| r.length).collect();
        if lengths.len() < 2 {
            return Err(config_err(format!("norm {label}: fewer than two nonempty models")));
        }
        lengths.sort_by(f64::total_cmp);
        let points: Vec<(f64, f64)> = spec
            .kappas
            .iter()
            .map(|&k| (k, empirical_quantile(&lengths, k)))
            .collect();
        let fit = fit_reciprocal_curve(&points)?;
        rows.extend(points.iter().map(|&(kappa, quantile)| QuantileRow {
            norm_label: label.clone(),
            kappa,
            quantile,
            fit_a: fit.a,
            fit_b: fit.b,
        }));
        summaries.push(NormSummary {
            label,
            norm,
            accepted: lengths.len(),
            empty_models: recs.iter().filter(|r| r.model_size == 0).count(),
            fallbacks: recs.iter().filter(|r| r.conditioning == "fallback_signs").count(),
            fit,
        });
        records.extend(recs);
    }
    Ok(QuantileOutput {
        rows,
        summaries,
        records,
    })
}
