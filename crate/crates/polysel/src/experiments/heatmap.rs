use polysel_core::inference::{Selected, Target};
use rayon::prelude::*;
use serde::Serialize;

use super::{draw_fit, verdict_label};
use crate::config::{HeatmapSpec, ScenarioConfig};
use crate::error::{config_err, Result};
use crate::sim::{derive_seed, make_design, substream};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapCell {
    pub p: usize,
    pub lambda: f64,
    pub fraction_certified: f64,
    /// `|m̂|/p` over the draws that were not certified.
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapRecord {
    pub p: usize,
    pub lambda: f64,
    pub rep: usize,
    pub model_size: usize,
    /// `skipped` when `|m̂| ≤ 1`.
    pub verdict: &'static str,
    pub redraws: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapOutput {
    pub cells: Vec<HeatmapCell>,
    pub records: Vec<HeatmapRecord>,
}

impl HeatmapOutput {
    pub fn total_redraws(&self) -> usize {
        self.records.iter().map(|r| r.redraws).sum()
    }
}

struct CellSetup {
    p: usize,
    lambda: f64,
    x: polysel_core::Matrix,
    mu: Vec<f64>,
    noise_seed: u64,
}

/// Fraction of draws whose model-conditional interval for the first selected
/// coefficient is certified to have infinite expected length, per `(p, λ)`.
pub fn run_heatmap(base: &ScenarioConfig, spec: &HeatmapSpec) -> Result<HeatmapOutput> {
    base.validate()?;
    if spec.p_grid.is_empty() || spec.lambda_grid.is_empty() {
        return Err(config_err("heatmap grids must be nonempty"));
    }
    if spec.p_grid.contains(&0) || spec.lambda_grid.iter().any(|l| !(*l > 0.0)) {
        return Err(config_err("heatmap grids need p ≥ 1 and λ > 0"));
    }
    let cells: Vec<CellSetup> = spec
        .p_grid
        .iter()
        .flat_map(|&p| spec.lambda_grid.iter().map(move |&lambda| (p, lambda)))
        .map(|(p, lambda)| {
            let label = format!("heatmap/p={p}/lambda={lambda:?}");
            let x = make_design(base.n, p, base.rho, derive_seed(base.seed, &format!("{label}/design")));
            let mu = x.mul_vec(&base.beta_pattern.coefficients(base.n, p));
            CellSetup {
                p,
                lambda,
                x,
                mu,
                noise_seed: derive_seed(base.seed, &format!("{label}/noise")),
            }
        })
        .collect();

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..base.reps).map(move |r| (c, r)))
        .collect();
    let records: Vec<HeatmapRecord> = jobs
        .into_par_iter()
        .map(|(c, rep)| {
            let cell = &cells[c];
            let mut rng = substream(cell.noise_seed, rep as u64);
            let draw = draw_fit(&cell.x, &cell.mu, 1.0, cell.lambda, &mut rng)?;
            let model_size = draw.fit.model.len();
            let verdict = if model_size > 1 {
                let sel = Selected::from_fit(&cell.x, &draw.y, cell.lambda, draw.fit)?;
                verdict_label(sel.certificate(&Target::Position(0), base.cap)?.verdict)
            } else {
                "skipped"
            };
            Ok(HeatmapRecord {
                p: cell.p,
                lambda: cell.lambda,
                rep,
                model_size,
                verdict,
                redraws: draw.redraws,
            })
        })
        .collect::<Result<_>>()?;

    let summary = records
        .chunks(base.reps)
        .zip(&cells)
        .map(|(recs, cell)| summarize(cell.p, cell.lambda, recs))
        .collect();
    Ok(HeatmapOutput {
        cells: summary,
        records,
    })
}

fn is_certified(label: &str) -> bool {
    label.starts_with("certified_infinite")
}

fn summarize(p: usize, lambda: f64, recs: &[HeatmapRecord]) -> HeatmapCell {
    let certified = recs.iter().filter(|r| is_certified(r.verdict)).count();
    let ratios = recs
        .iter()
        .filter(|r| !is_certified(r.verdict))
        .map(|r| r.model_size as f64 / p as f64);
    let (min_ratio, max_ratio) = ratios.fold((None, None), |(lo, hi): (Option<f64>, Option<f64>), r| {
        (Some(lo.map_or(r, |v| v.min(r))), Some(hi.map_or(r, |v| v.max(r))))
    });
    HeatmapCell {
        p,
        lambda,
        fraction_certified: certified as f64 / recs.len() as f64,
        min_ratio,
        max_ratio,
        reps: recs.len(),
    }
}
