//! Selective confidence intervals after the Lasso and the ex-post certificate
//! of infinite expected interval length.

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::geometry::{
    line_section, make_contrast, Contrast, EventGeometry, Polyhedron, Signs, DEFAULT_CAP,
};
use crate::kernel::{ci_location, IntervalUnion};
use crate::lasso::{fit_default, LassoFit, LassoProblem};
use crate::linalg::{Matrix, Qr};

/// Tail probabilities: `L = Q_{1-α₁}`, `U = Q_{α₂}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl Level {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        for a in [alpha1, alpha2] {
            if !(a > 0.0 && a <= 0.5) {
                return Err(domain!("tail probabilities must lie in (0, 1/2], got {a}"));
            }
        }
        Ok(Self { alpha1, alpha2 })
    }

    /// Equal tails `α/2`.
    pub fn two_sided(alpha: f64) -> Result<Self> {
        Self::new(alpha / 2.0, alpha / 2.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha1 + self.alpha2
    }
}

/// The parameter `γ'β^m` of a selected model.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// The coefficient at this position within the selected model.
    Position(usize),
    /// An explicit `γ` of the selected model's length.
    Gamma(Vec<f64>),
}

impl Target {
    pub fn gamma(&self, model_size: usize) -> Result<Vec<f64>> {
        match self {
            Target::Position(i) if *i < model_size => {
                let mut g = alloc::vec![0.0; model_size];
                g[*i] = 1.0;
                Ok(g)
            }
            Target::Position(i) => Err(domain!("position {i} outside a model of size {model_size}")),
            Target::Gamma(g) if g.len() == model_size => Ok(g.clone()),
            Target::Gamma(g) => Err(domain!("gamma has length {}, model has {model_size}", g.len())),
        }
    }
}

/// What the interval conditions on.
#[derive(Debug, Clone, PartialEq)]
pub enum Conditioning {
    Signs { model: Vec<usize>, signs: Signs },
    Model { model: Vec<usize> },
    /// `T_m` was too expensive; the sign-conditional interval is reported.
    FallbackSigns { model: Vec<usize>, signs: Signs },
    /// Empty model: the degenerate set `{point}` with `point ∈ {0, 1}`.
    EmptyModelRandomized { point: u8 },
    UserPolyhedra,
}

impl Conditioning {
    pub fn label(&self) -> &'static str {
        match self {
            Conditioning::Signs { .. } => "signs",
            Conditioning::Model { .. } => "model",
            Conditioning::FallbackSigns { .. } => "fallback_signs",
            Conditioning::EmptyModelRandomized { .. } => "empty_model_randomized",
            Conditioning::UserPolyhedra => "user_polyhedra",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: Level,
    pub conditioning: Conditioning,
    /// `η'y`; zero for the empty model.
    pub estimate: f64,
    /// `σ_m²`; zero for the empty model.
    pub variance: f64,
    /// The truncation set; `None` for the empty model.
    pub truncation: Option<IntervalUnion>,
}

impl ConfidenceInterval {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn covers(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    fn from_set(set: IntervalUnion, var: f64, w: f64, level: Level, conditioning: Conditioning) -> Result<Self> {
        let (lower, upper) = ci_location(&set, var, w, level.alpha1, level.alpha2)?;
        Ok(Self {
            lower,
            upper,
            level,
            conditioning,
            estimate: w,
            variance: var,
            truncation: Some(set),
        })
    }

    fn empty_model(level: Level, u: f64) -> Self {
        let point = u8::from(u >= 1.0 - level.alpha());
        Self {
            lower: f64::from(point),
            upper: f64::from(point),
            level,
            conditioning: Conditioning::EmptyModelRandomized { point },
            estimate: 0.0,
            variance: 0.0,
            truncation: None,
        }
    }
}

/// Which side of `T_m(z)` is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundedSide {
    Above,
    Below,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `T_m(z)` is bounded on a side, so the conditional expected length is
    /// infinite.
    CertifiedInfinite(BoundedSide),
    /// The sufficient condition failed at the observed data. This does not
    /// assert finite expected length.
    NotCertified,
    /// Too many parallel rows to enumerate.
    UndecidedCapacity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthCertificate {
    pub verdict: Verdict,
    pub model: Vec<usize>,
    /// `z = (I - P_η) y`; empty for the empty model.
    pub witness: Vec<f64>,
}

/// A design, response and penalty together with the Lasso fit.
#[derive(Debug, Clone)]
pub struct Selected<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    lambda: f64,
    fit: LassoFit,
}

impl<'a> Selected<'a> {
    /// Fits the Lasso with default tolerance.
    pub fn new(x: &'a Matrix, y: &'a [f64], lambda: f64) -> Result<Self> {
        let prob = LassoProblem::new(x, y, lambda)?;
        let fit = fit_default(&prob)?;
        Ok(Self { x, y, lambda, fit })
    }

    /// Wraps an existing fit of the same problem.
    pub fn from_fit(x: &'a Matrix, y: &'a [f64], lambda: f64, fit: LassoFit) -> Result<Self> {
        LassoProblem::new(x, y, lambda)?;
        if fit.beta.len() != x.cols() {
            return Err(domain!("fit has {} coefficients, design has {}", fit.beta.len(), x.cols()));
        }
        Ok(Self { x, y, lambda, fit })
    }

    pub fn fit(&self) -> &LassoFit {
        &self.fit
    }

    pub fn model(&self) -> &[usize] {
        &self.fit.model
    }

    pub fn signs(&self) -> &[i8] {
        &self.fit.signs
    }

    /// Contrast for `target`; `None` for the empty model.
    pub fn contrast(&self, target: &Target, sigma2: f64) -> Result<Option<Contrast>> {
        if self.fit.model.is_empty() {
            return Ok(None);
        }
        if self.fit.boundary_flag {
            return Err(Error::Boundary);
        }
        let gamma = target.gamma(self.fit.model.len())?;
        make_contrast(self.x, &self.fit.model, &gamma, sigma2).map(Some)
    }

    fn geometry(&self, contrast: &Contrast) -> Result<(f64, EventGeometry)> {
        let (w, z) = contrast.split(self.y);
        Ok((w, EventGeometry::new(self.x, self.lambda, contrast, &z)?))
    }

    /// `T_{m̂,ŝ}(z)` at the observed data.
    pub fn sign_truncation(&self, contrast: &Contrast) -> Result<(f64, IntervalUnion)> {
        let (w, geom) = self.geometry(contrast)?;
        let sec = geom.section(&self.fit.signs)?;
        let (a, b) = sec.interval().ok_or(Error::Boundary)?;
        Ok((w, IntervalUnion::new([(a, b)])?))
    }

    /// Interval conditional on `{m̂ = m, ŝ = s}`. `u` is the uniform variate
    /// used only when the model is empty.
    pub fn ci_given_signs(&self, target: &Target, sigma2: f64, level: Level, u: f64) -> Result<ConfidenceInterval> {
        let Some(contrast) = self.contrast(target, sigma2)? else {
            return Ok(ConfidenceInterval::empty_model(level, u));
        };
        self.signs_interval(&contrast, level, false)
    }

    fn signs_interval(&self, contrast: &Contrast, level: Level, fallback: bool) -> Result<ConfidenceInterval> {
        let (w, set) = self.sign_truncation(contrast)?;
        let (model, signs) = (self.fit.model.clone(), self.fit.signs.clone());
        let cond = if fallback {
            Conditioning::FallbackSigns { model, signs }
        } else {
            Conditioning::Signs { model, signs }
        };
        ConfidenceInterval::from_set(set, contrast.sigma_m2(), w, level, cond)
    }

    /// Interval conditional on `{m̂ = m}`; falls back to the sign-conditional
    /// interval when `|m̂| > cap`.
    pub fn ci_given_model(
        &self,
        target: &Target,
        sigma2: f64,
        level: Level,
        cap: usize,
        u: f64,
    ) -> Result<ConfidenceInterval> {
        let Some(contrast) = self.contrast(target, sigma2)? else {
            return Ok(ConfidenceInterval::empty_model(level, u));
        };
        let (w, mut geom) = self.geometry(&contrast)?;
        match geom.truncation_union(cap) {
            Ok(set) => {
                let cond = Conditioning::Model {
                    model: self.fit.model.clone(),
                };
                ConfidenceInterval::from_set(set, contrast.sigma_m2(), w, level, cond)
            }
            Err(Error::Capacity { .. }) => self.signs_interval(&contrast, level, true),
            Err(e) => Err(e),
        }
    }

    /// Ex-post check of whether `T_m̂(z)` is bounded on a side.
    pub fn certificate(&self, target: &Target, cap: usize) -> Result<LengthCertificate> {
        // the verdict never depends on σ²
        let Some(contrast) = self.contrast(target, 1.0)? else {
            return Ok(LengthCertificate {
                verdict: Verdict::NotCertified,
                model: Vec::new(),
                witness: Vec::new(),
            });
        };
        let (_, z) = contrast.split(self.y);
        let geom = EventGeometry::new(self.x, self.lambda, &contrast, &z)?;
        let verdict = if geom.zero_rows().count() > cap {
            Verdict::UndecidedCapacity
        } else {
            let u = geom.unboundedness_probe();
            match (u.above, u.below) {
                (true, true) => Verdict::NotCertified,
                (false, true) => Verdict::CertifiedInfinite(BoundedSide::Above),
                (true, false) => Verdict::CertifiedInfinite(BoundedSide::Below),
                (false, false) => Verdict::CertifiedInfinite(BoundedSide::Both),
            }
        };
        Ok(LengthCertificate {
            verdict,
            model: self.fit.model.clone(),
            witness: z,
        })
    }
}

/// Fits the Lasso and returns the sign-conditional interval.
pub fn ci_given_signs(
    x: &Matrix,
    y: &[f64],
    lambda: f64,
    target: &Target,
    sigma2: f64,
    level: Level,
    u: f64,
) -> Result<ConfidenceInterval> {
    Selected::new(x, y, lambda)?.ci_given_signs(target, sigma2, level, u)
}

/// Fits the Lasso and returns the model-conditional interval.
pub fn ci_given_model(
    x: &Matrix,
    y: &[f64],
    lambda: f64,
    target: &Target,
    sigma2: f64,
    level: Level,
    u: f64,
) -> Result<ConfidenceInterval> {
    Selected::new(x, y, lambda)?.ci_given_model(target, sigma2, level, DEFAULT_CAP, u)
}

/// Fits the Lasso and evaluates the certificate.
pub fn infinite_length_certificate(x: &Matrix, y: &[f64], lambda: f64, target: &Target) -> Result<LengthCertificate> {
    let sel = Selected::new(x, y, lambda)?;
    if sel.fit.boundary_flag {
        return Err(Error::Boundary);
    }
    sel.certificate(target, DEFAULT_CAP)
}

/// `‖y - P_X y‖² / (n - p)`.
pub fn estimate_variance(x: &Matrix, y: &[f64]) -> Result<f64> {
    let (n, p) = (x.rows(), x.cols());
    if p >= n {
        return Err(domain!("variance estimate needs p < n, got p = {p}, n = {n}"));
    }
    if y.len() != n {
        return Err(domain!("response has length {}, design has {n} rows", y.len()));
    }
    let qr = Qr::new(x)?;
    let r = qr.residual(y);
    Ok(r.iter().map(|v| v * v).sum::<f64>() / (n - p) as f64)
}

/// Interval conditional on `y` lying in the union of `polyhedra`.
pub fn generic_polyhedral_ci(
    polyhedra: &[Polyhedron],
    contrast: &Contrast,
    y: &[f64],
    level: Level,
) -> Result<ConfidenceInterval> {
    if let Some(bad) = polyhedra.iter().find(|p| p.dim() != y.len()) {
        return Err(domain!("polyhedron has dimension {}, data has {}", bad.dim(), y.len()));
    }
    let inside = polyhedra.iter().filter(|p| p.contains(y)).count();
    if inside != 1 {
        return Err(domain!("data lies in {inside} of the polyhedra; exactly one is required"));
    }
    let (w, z) = contrast.split(y);
    let pieces: Vec<(f64, f64)> = polyhedra
        .iter()
        .filter_map(|p| line_section(p, contrast, &z).interval())
        .collect();
    let set = IntervalUnion::new(pieces)?;
    ConfidenceInterval::from_set(set, contrast.sigma_m2(), w, level, Conditioning::UserPolyhedra)
}
