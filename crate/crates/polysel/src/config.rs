//! JSON experiment configuration.
//!
//! One file configures every subcommand: the scenario fields sit at the top
//! level and each experiment reads its own optional section. Missing fields
//! take defaults.

use std::path::{Path, PathBuf};

use polysel_core::IntervalUnion;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config_err, HarnessError, Result};

/// Regression coefficients of the simulated truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaPattern {
    /// The first `p/2` entries equal `1/√n`, the rest zero.
    HalfOnesOverSqrtN,
    /// `scale` at even positions (0-based), zero at odd ones.
    Alternating { scale: f64 },
}

impl BetaPattern {
    pub fn coefficients(&self, n: usize, p: usize) -> Vec<f64> {
        match self {
            BetaPattern::HalfOnesOverSqrtN => {
                let v = 1.0 / (n as f64).sqrt();
                (0..p).map(|j| if j < p / 2 { v } else { 0.0 }).collect()
            }
            BetaPattern::Alternating { scale } => {
                (0..p).map(|j| if j % 2 == 0 { *scale } else { 0.0 }).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub lambda: f64,
    pub beta_pattern: BetaPattern,
    pub reps: usize,
    pub seed: u64,
    pub alpha: f64,
    /// Largest number of sign patterns enumerated is `2^cap`.
    pub cap: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n: 100,
            p: 14,
            rho: 0.2,
            lambda: 10.0,
            beta_pattern: BetaPattern::HalfOnesOverSqrtN,
            reps: 500,
            seed: 0,
            alpha: 0.05,
            cap: 20,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(config_err(format!("n must be at least 2, got {}", self.n)));
        }
        if self.p < 1 {
            return Err(config_err("p must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(config_err(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(config_err(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.reps < 1 {
            return Err(config_err("reps must be at least 1"));
        }
        check_alpha(self.alpha)?;
        if self.cap > 30 {
            return Err(config_err(format!("cap must be at most 30, got {}", self.cap)));
        }
        if let BetaPattern::Alternating { scale } = self.beta_pattern {
            if !scale.is_finite() {
                return Err(config_err("beta scale must be finite"));
            }
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(config_err(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeatmapSpec {
    pub p_grid: Vec<usize>,
    pub lambda_grid: Vec<f64>,
}

impl Default for HeatmapSpec {
    fn default() -> Self {
        Self {
            p_grid: vec![20, 50, 100, 150, 200],
            lambda_grid: vec![1.0, 5.0, 10.0, 25.0, 50.0, 100.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantileSpec {
    /// Values of `‖β‖`; `None` means `0, √(p/2)/10, √(p/2)`.
    pub norms: Option<Vec<f64>>,
    pub kappas: Vec<f64>,
}

impl Default for QuantileSpec {
    fn default() -> Self {
        let mut kappas: Vec<f64> = (0..10).map(|i| 0.5 + 0.05 * i as f64).collect();
        kappas.push(0.99);
        Self { norms: None, kappas }
    }
}

/// A grid of `points` evenly spaced values from `start` to `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl LinearGrid {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.start],
            k => {
                let step = (self.stop - self.start) / (k - 1) as f64;
                (0..k).map(|i| self.start + step * i as f64).collect()
            }
        }
    }
}

/// `[a, b]` with `null` for an infinite endpoint.
pub type PieceSpec = (Option<f64>, Option<f64>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LengthCurveSpec {
    pub pieces: Vec<PieceSpec>,
    pub variance: f64,
    pub grid: LinearGrid,
}

impl LengthCurveSpec {
    pub fn set(&self) -> Result<IntervalUnion> {
        let pieces = self.pieces.iter().map(|(a, b)| {
            (a.unwrap_or(f64::NEG_INFINITY), b.unwrap_or(f64::INFINITY))
        });
        Ok(IntervalUnion::new(pieces)?)
    }
}

impl Default for LengthCurveSpec {
    fn default() -> Self {
        Self {
            pieces: vec![
                (Some(-3.0), Some(-2.0)),
                (Some(-1.0), Some(1.0)),
                (Some(2.0), Some(3.0)),
            ],
            variance: 1.0,
            grid: LinearGrid {
                start: -3.0,
                stop: 3.0,
                points: 601,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FloorCurveSpec {
    pub thetas: Vec<f64>,
    pub variance: f64,
    /// Truncation set `(-∞, upper)`.
    pub upper: f64,
    pub kappas: LinearGrid,
}

impl Default for FloorCurveSpec {
    fn default() -> Self {
        Self {
            thetas: vec![-2.0, -1.0, 0.0],
            variance: 1.0,
            upper: 0.0,
            kappas: LinearGrid {
                start: 0.5,
                stop: 0.99,
                points: 50,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// Use the true noise variance.
    Known,
    /// Plug in the full-model residual variance.
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoverageSpec {
    pub sigma2: f64,
    pub variance: VarianceMode,
    /// Also report coverage conditional on the most frequent model and
    /// sign vector.
    pub conditional: bool,
    pub min_accepted: usize,
}

impl Default for CoverageSpec {
    fn default() -> Self {
        Self {
            sigma2: 1.0,
            variance: VarianceMode::Known,
            conditional: false,
            min_accepted: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CiSpec {
    /// CSV file with one row per observation and one column per regressor.
    pub x: Option<PathBuf>,
    /// CSV file with a single column of responses.
    pub y: Option<PathBuf>,
    pub has_headers: bool,
    /// Position of the target coefficient within the selected model.
    pub position: usize,
    /// Noise variance; estimated from the full model when absent.
    pub sigma2: Option<f64>,
}


#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    #[serde(flatten)]
    pub scenario: ScenarioConfig,
    pub heatmap: HeatmapSpec,
    pub quantiles: QuantileSpec,
    pub lengthcurve: LengthCurveSpec,
    pub floorcurves: FloorCurveSpec,
    pub coverage: CoverageSpec,
    pub ci: CiSpec,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.scenario.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
