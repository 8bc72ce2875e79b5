//! Lasso via cyclic coordinate descent.
//!
//! Minimizes `½‖y - Xβ‖² + λ‖β‖₁` with an unscaled penalty. Soft-thresholding
//! produces exact zeros, so the selected model is read off the support.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::linalg::{axpy, dot, null_vector, Matrix, Qr};

/// Relative distance to a selection-event face below which a fit is flagged.
pub const BOUNDARY_TOL: f64 = 1e-7;

/// Default sweep budget.
pub const DEFAULT_MAX_SWEEPS: usize = 100_000;

/// A Lasso program. Borrows the design so that many responses can share it.
#[derive(Debug, Clone, Copy)]
pub struct LassoProblem<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    lambda: f64,
}

impl<'a> LassoProblem<'a> {
    pub fn new(x: &'a Matrix, y: &'a [f64], lambda: f64) -> Result<Self> {
        let (n, p) = (x.rows(), x.cols());
        if n == 0 || p == 0 {
            return Err(domain!("design must be nonempty, got {n}x{p}"));
        }
        if y.len() != n {
            return Err(domain!("response has length {}, design has {n} rows", y.len()));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(domain!("lambda must be positive and finite, got {lambda}"));
        }
        if y.iter().any(|v| !v.is_finite()) || x.as_col_major().iter().any(|v| !v.is_finite()) {
            return Err(domain!("design and response must be finite"));
        }
        if let Some(j) = (0..p).find(|&j| x.col(j).iter().all(|&v| v == 0.0)) {
            return Err(domain!("column {j} of the design is zero"));
        }
        Ok(Self { x, y, lambda })
    }

    pub fn x(&self) -> &'a Matrix {
        self.x
    }

    pub fn y(&self) -> &'a [f64] {
        self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `1e-9 (1 + max_j |x_j'y|)`.
    pub fn default_tol(&self) -> f64 {
        let m = (0..self.x.cols())
            .map(|j| dot(self.x.col(j), self.y).abs())
            .fold(0.0, f64::max);
        1e-9 * (1.0 + m)
    }

    pub fn residual(&self, beta: &[f64]) -> Vec<f64> {
        let xb = self.x.mul_vec(beta);
        self.y.iter().zip(&xb).map(|(a, b)| a - b).collect()
    }

    pub fn objective(&self, beta: &[f64]) -> f64 {
        let r = self.residual(beta);
        0.5 * dot(&r, &r) + self.lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    }
}

/// A converged Lasso solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub beta: Vec<f64>,
    /// Sorted support of `beta`.
    pub model: Vec<usize>,
    /// Signs of `beta` on `model`.
    pub signs: Vec<i8>,
    pub kkt_gap: f64,
    /// Set when the fit sits within float tolerance of a selection-event face.
    pub boundary_flag: bool,
    pub sweeps: usize,
}

/// Selected model and signs; signs are undefined for the empty model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    Empty,
    Model { model: Vec<usize>, signs: Vec<i8> },
}

pub fn selection(fit: &LassoFit) -> Selection {
    if fit.model.is_empty() {
        Selection::Empty
    } else {
        Selection::Model {
            model: fit.model.clone(),
            signs: fit.signs.clone(),
        }
    }
}

/// KKT residuals: `| x_j'r - λ sign(β_j) |` on the support and
/// `max(0, |x_j'r| - λ)` off it. Returns `(max, per-coordinate)`.
pub fn kkt_residuals(prob: &LassoProblem<'_>, beta: &[f64]) -> (f64, Vec<f64>) {
    let r = prob.residual(beta);
    let lam = prob.lambda;
    let per: Vec<f64> = (0..prob.x.cols())
        .map(|j| {
            let g = dot(prob.x.col(j), &r);
            if beta[j] != 0.0 {
                (g - lam * beta[j].signum()).abs()
            } else {
                (g.abs() - lam).max(0.0)
            }
        })
        .collect();
    (per.iter().copied().fold(0.0, f64::max), per)
}

#[inline]
fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Coordinate-descent state: coefficients with their residual kept in sync.
#[derive(Debug, Clone)]
pub struct CoordinateDescent<'a> {
    prob: LassoProblem<'a>,
    beta: Vec<f64>,
    resid: Vec<f64>,
    col_sq: Vec<f64>,
    max_col_norm: f64,
}

impl<'a> CoordinateDescent<'a> {
    pub fn new(prob: LassoProblem<'a>) -> Self {
        let col_sq: Vec<f64> = (0..prob.x.cols()).map(|j| dot(prob.x.col(j), prob.x.col(j))).collect();
        let max_col_norm = col_sq.iter().fold(0.0f64, |m, &c| m.max(libm::sqrt(c)));
        Self {
            beta: vec![0.0; prob.x.cols()],
            resid: prob.y.to_vec(),
            prob,
            col_sq,
            max_col_norm,
        }
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn objective(&self) -> f64 {
        0.5 * dot(&self.resid, &self.resid)
            + self.prob.lambda * self.beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    /// Exact minimization over coordinate `j`; returns the change in `β_j`.
    #[inline]
    pub fn update(&mut self, j: usize) -> f64 {
        let xj = self.prob.x.col(j);
        let old = self.beta[j];
        let rho = dot(xj, &self.resid) + self.col_sq[j] * old;
        let new = soft_threshold(rho, self.prob.lambda) / self.col_sq[j];
        let delta = new - old;
        if delta != 0.0 {
            axpy(-delta, xj, &mut self.resid);
            self.beta[j] = new;
        }
        delta
    }

    /// One pass over `order`; returns the largest induced change in any
    /// correlation bound `|Δβ_j| ‖x_j‖ max_k ‖x_k‖`.
    pub fn sweep(&mut self, order: &[usize]) -> f64 {
        let mut worst = 0.0f64;
        for &j in order {
            let d = self.update(j);
            worst = worst.max(d.abs() * libm::sqrt(self.col_sq[j]) * self.max_col_norm);
        }
        worst
    }

    fn support(&self) -> Vec<usize> {
        (0..self.beta.len()).filter(|&j| self.beta[j] != 0.0).collect()
    }

    fn resync(&mut self) {
        self.resid = self.prob.residual(&self.beta);
    }

    /// Removes support variables whose columns are linearly dependent by
    /// moving along a null direction of `X_S` until a coefficient vanishes.
    /// The residual is unchanged and the penalty does not increase.
    fn drop_dependent(&mut self) -> bool {
        let mut changed = false;
        loop {
            let m = self.support();
            let xm = self.prob.x.select_columns(&m);
            let Some(mut v) = null_vector(&xm, NULL_TOL) else {
                return changed;
            };
            let s_dot_v: f64 = m.iter().zip(&v).map(|(&j, vi)| self.beta[j].signum() * vi).sum();
            if s_dot_v > 0.0 {
                v.iter_mut().for_each(|t| *t = -*t);
            }
            let Some((step, hit)) = first_crossing(m.iter().map(|&j| self.beta[j]), &v) else {
                return changed;
            };
            for (k, &j) in m.iter().enumerate() {
                self.beta[j] += step * v[k];
            }
            self.beta[m[hit]] = 0.0;
            self.resync();
            changed = true;
        }
    }

    /// Moves toward the exact active-set solution `β_m = (X_m'X_m)⁻¹(X_m'y - λs)`.
    ///
    /// If that solution keeps the signs and does not worsen the KKT gap it
    /// replaces the iterate. If it flips a sign, the iterate moves along the
    /// segment to the first zero crossing, which lowers the objective.
    fn polish(&mut self, current_gap: f64) -> Polish {
        let m = self.support();
        if m.is_empty() {
            return Polish::Failed;
        }
        if m.len() > self.prob.x.rows() && !self.drop_dependent() {
            return Polish::Failed;
        }
        let m = self.support();
        let xm = self.prob.x.select_columns(&m);
        let qr = match Qr::new(&xm) {
            Ok(qr) => qr,
            Err(_) => {
                return if self.drop_dependent() { Polish::Stepped } else { Polish::Failed };
            }
        };
        let s: Vec<f64> = m.iter().map(|&j| self.beta[j].signum()).collect();
        let mut rhs = xm.tr_mul_vec(self.prob.y);
        axpy(-self.prob.lambda, &s, &mut rhs);
        let bm = qr.gram_solve(&rhs);
        if bm.iter().zip(&s).any(|(b, s)| b * s <= 0.0) {
            let dir: Vec<f64> = m.iter().zip(&bm).map(|(&j, b)| b - self.beta[j]).collect();
            return match first_crossing(m.iter().map(|&j| self.beta[j]), &dir) {
                Some((step, hit)) if step <= 1.0 => {
                    for (k, &j) in m.iter().enumerate() {
                        self.beta[j] += step * dir[k];
                    }
                    self.beta[m[hit]] = 0.0;
                    self.resync();
                    Polish::Stepped
                }
                _ => Polish::Failed,
            };
        }
        let mut cand = vec![0.0; self.beta.len()];
        for (k, &j) in m.iter().enumerate() {
            cand[j] = bm[k];
        }
        let (gap, _) = kkt_residuals(&self.prob, &cand);
        if gap <= current_gap {
            self.beta = cand;
            self.resync();
            Polish::Accepted(gap)
        } else {
            Polish::Failed
        }
    }
}

/// Active-set sweeps between full sweeps.
const MAX_ACTIVE_PASSES: usize = 50;

/// Relative tolerance for declaring support columns dependent.
const NULL_TOL: f64 = 1e-9;

enum Polish {
    Accepted(f64),
    Stepped,
    Failed,
}

/// Smallest `t > 0` at which some `β_k + t d_k` reaches zero, with its index.
fn first_crossing(beta: impl Iterator<Item = f64>, dir: &[f64]) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (k, b) in beta.enumerate() {
        if b * dir[k] < 0.0 {
            let t = -b / dir[k];
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, k));
            }
        }
    }
    best
}

/// Options for [`fit_with`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// KKT tolerance; `None` selects [`LassoProblem::default_tol`].
    pub tol: Option<f64>,
    pub max_sweeps: usize,
    /// Coordinate order for full sweeps; ascending when `None`.
    pub order: Option<Vec<usize>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: None,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            order: None,
        }
    }
}

/// Fits with ascending coordinate order.
pub fn fit(prob: &LassoProblem<'_>, tol: f64, max_sweeps: usize) -> Result<LassoFit> {
    fit_with(
        prob,
        &FitOptions {
            tol: Some(tol),
            max_sweeps,
            order: None,
        },
    )
}

/// Fits with the default tolerance and sweep budget.
pub fn fit_default(prob: &LassoProblem<'_>) -> Result<LassoFit> {
    fit_with(prob, &FitOptions::default())
}

pub fn fit_with(prob: &LassoProblem<'_>, opts: &FitOptions) -> Result<LassoFit> {
    let p = prob.x.cols();
    let tol = opts.tol.unwrap_or_else(|| prob.default_tol());
    if !(tol > 0.0) {
        return Err(domain!("tolerance must be positive, got {tol}"));
    }
    let order: Vec<usize> = match &opts.order {
        Some(o) => {
            let mut seen = vec![false; p];
            if o.len() != p || o.iter().any(|&j| j >= p || core::mem::replace(&mut seen[j], true)) {
                return Err(domain!("coordinate order must be a permutation of 0..{p}"));
            }
            o.clone()
        }
        None => (0..p).collect(),
    };

    let mut cd = CoordinateDescent::new(*prob);
    let mut sweeps = 0;
    let mut gap;
    loop {
        cd.sweep(&order);
        sweeps += 1;
        // active-set passes, bounded so that ill-conditioned supports still
        // reach the exact solve below
        for _ in 0..MAX_ACTIVE_PASSES {
            let active: Vec<usize> = order.iter().copied().filter(|&j| cd.beta[j] != 0.0).collect();
            if active.is_empty() || sweeps >= opts.max_sweeps {
                break;
            }
            let change = cd.sweep(&active);
            sweeps += 1;
            if change <= 0.25 * tol {
                break;
            }
        }
        cd.resync();
        gap = kkt_residuals(prob, &cd.beta).0;
        if gap > tol {
            if let Polish::Accepted(g) = cd.polish(gap) {
                gap = g;
            }
        }
        if gap <= tol {
            break;
        }
        if sweeps >= opts.max_sweeps {
            return Err(Error::Convergence {
                sweeps,
                gap,
                tol,
            });
        }
    }
    // a final exact solve removes the descent's residual slack
    if let Polish::Accepted(g) = cd.polish(gap) {
        gap = g;
    }
    Ok(finish(prob, cd.beta, gap, sweeps))
}

fn finish(prob: &LassoProblem<'_>, beta: Vec<f64>, kkt_gap: f64, sweeps: usize) -> LassoFit {
    let model: Vec<usize> = (0..beta.len()).filter(|&j| beta[j] != 0.0).collect();
    let signs = model.iter().map(|&j| if beta[j] > 0.0 { 1 } else { -1 }).collect();
    let r = prob.residual(&beta);
    let lam = prob.lambda;
    let boundary_flag = (0..beta.len()).any(|j| {
        let xj = prob.x.col(j);
        if beta[j] == 0.0 {
            (dot(xj, &r).abs() - lam).abs() <= BOUNDARY_TOL * lam
        } else {
            beta[j].abs() * dot(xj, xj) <= BOUNDARY_TOL * lam
        }
    });
    LassoFit {
        beta,
        model,
        signs,
        kkt_gap,
        boundary_flag,
        sweeps,
    }
}
