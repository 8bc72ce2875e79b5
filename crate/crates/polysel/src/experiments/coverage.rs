use std::collections::BTreeMap;

use polysel_core::inference::{estimate_variance, Level, Selected, Target};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{draw_fit, format_model, format_signs};
use crate::config::{CoverageSpec, ScenarioConfig, VarianceMode};
use crate::error::{config_err, HarnessError, Result};
use crate::sim::{derive_seed, make_design, substream};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRow {
    pub conditioning: String,
    pub nominal: f64,
    pub empirical: f64,
    pub accepted_reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRecord {
    pub rep: usize,
    pub model: String,
    pub signs: String,
    pub target: f64,
    pub sigma2: f64,
    pub signs_lower: f64,
    pub signs_upper: f64,
    pub model_lower: f64,
    pub model_upper: f64,
    pub model_conditioning: &'static str,
    pub covered_signs: bool,
    pub covered_model: bool,
    pub redraws: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageOutput {
    pub rows: Vec<CoverageRow>,
    pub records: Vec<CoverageRecord>,
}

/// Coverage of both intervals for the first selected coefficient, with the
/// truth `μ = Xβ` known.
pub fn run_coverage_check(base: &ScenarioConfig, spec: &CoverageSpec) -> Result<CoverageOutput> {
    base.validate()?;
    if !(spec.sigma2 > 0.0 && spec.sigma2.is_finite()) {
        return Err(config_err("sigma2 must be positive"));
    }
    if spec.variance == VarianceMode::Estimated && base.p >= base.n {
        return Err(config_err("an estimated variance needs p < n"));
    }
    let level = Level::two_sided(base.alpha)?;
    let x = make_design(base.n, base.p, base.rho, derive_seed(base.seed, "coverage/design"));
    let mu = x.mul_vec(&base.beta_pattern.coefficients(base.n, base.p));
    let noise_seed = derive_seed(base.seed, "coverage/noise");
    let sigma = spec.sigma2.sqrt();

    let records: Vec<CoverageRecord> = (0..base.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = substream(noise_seed, rep as u64);
            let draw = draw_fit(&x, &mu, sigma, base.lambda, &mut rng)?;
            let u: f64 = rng.random();
            let sigma2 = match spec.variance {
                VarianceMode::Known => spec.sigma2,
                VarianceMode::Estimated => estimate_variance(&x, &draw.y)?,
            };
            let (model, signs) = (format_model(&draw.fit.model), format_signs(&draw.fit.signs));
            let sel = Selected::from_fit(&x, &draw.y, base.lambda, draw.fit)?;
            let target = match sel.contrast(&Target::Position(0), sigma2)? {
                Some(c) => c.target(&mu),
                None => 0.0,
            };
            let by_signs = sel.ci_given_signs(&Target::Position(0), sigma2, level, u)?;
            let by_model = sel.ci_given_model(&Target::Position(0), sigma2, level, base.cap, u)?;
            Ok(CoverageRecord {
                rep,
                model,
                signs,
                target,
                sigma2,
                signs_lower: by_signs.lower,
                signs_upper: by_signs.upper,
                model_lower: by_model.lower,
                model_upper: by_model.upper,
                model_conditioning: by_model.conditioning.label(),
                covered_signs: by_signs.covers(target),
                covered_model: by_model.covers(target),
                redraws: draw.redraws,
            })
        })
        .collect::<Result<_>>()?;

    let nominal = 1.0 - base.alpha;
    let rate = |hits: usize, total: usize| hits as f64 / total as f64;
    let mut rows = vec![
        CoverageRow {
            conditioning: "unconditional_signs".to_owned(),
            nominal,
            empirical: rate(records.iter().filter(|r| r.covered_signs).count(), records.len()),
            accepted_reps: records.len(),
        },
        CoverageRow {
            conditioning: "unconditional_model".to_owned(),
            nominal,
            empirical: rate(records.iter().filter(|r| r.covered_model).count(), records.len()),
            accepted_reps: records.len(),
        },
    ];

    if spec.conditional {
        let nonempty = || records.iter().filter(|r| r.model != "[]");
        let (m, s) = most_frequent(nonempty().map(|r| (r.model.clone(), r.signs.clone())))
            .ok_or_else(|| insufficient("signs", 0, spec.min_accepted))?;
        let hits: Vec<bool> = nonempty()
            .filter(|r| r.model == m && r.signs == s)
            .map(|r| r.covered_signs)
            .collect();
        rows.push(conditional_row(format!("signs m={m} s={s}"), nominal, &hits, spec.min_accepted)?);

        let m = most_frequent(nonempty().map(|r| r.model.clone()))
            .ok_or_else(|| insufficient("model", 0, spec.min_accepted))?;
        let hits: Vec<bool> = nonempty()
            .filter(|r| r.model == m && r.model_conditioning == "model")
            .map(|r| r.covered_model)
            .collect();
        rows.push(conditional_row(format!("model m={m}"), nominal, &hits, spec.min_accepted)?);
    }
    Ok(CoverageOutput { rows, records })
}

/// Most frequent key; ties go to the smallest key.
fn most_frequent<K: Ord>(keys: impl Iterator<Item = K>) -> Option<K> {
    let mut counts = BTreeMap::new();
    for k in keys {
        *counts.entry(k).or_insert(0usize) += 1;
    }
    let best = counts.values().copied().max()?;
    counts.into_iter().find(|(_, c)| *c == best).map(|(k, _)| k)
}

fn insufficient(conditioning: &str, accepted: usize, required: usize) -> HarnessError {
    HarnessError::InsufficientData {
        conditioning: conditioning.to_owned(),
        accepted,
        required,
    }
}

fn conditional_row(conditioning: String, nominal: f64, hits: &[bool], required: usize) -> Result<CoverageRow> {
    if hits.len() < required {
        return Err(insufficient(&conditioning, hits.len(), required));
    }
    Ok(CoverageRow {
        empirical: hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64,
        conditioning,
        nominal,
        accepted_reps: hits.len(),
    })
}
