//! Selection events of the Lasso as polyhedra, and their sections along the
//! contrast direction.
//!
//! For a model `m` and signs `s`, the event `{m̂ = m, ŝ = s}` is the open
//! polyhedron `{y : A y < b}` with an inactive block `A⁰` (two rows per
//! inactive variable) and an active block `A¹` (one row per active variable).
//! Writing `y = z + c w` with `w = η'y` and `z = (I - P_η) y`, the event
//! restricted to the line is an open interval `(V⁻, V⁺)`, nonempty when
//! `V⁻ < V⁺` and `V⁰ > 0`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use crate::error::{domain, Error, Result};
use crate::kernel::IntervalUnion;
use crate::linalg::{axpy, dot, norm2, Matrix, Qr};

/// `|(Ac)_i| ≤ ZERO_ROW_TOL ‖A_i‖ ‖c‖` marks a row parallel to the line.
pub const ZERO_ROW_TOL: f64 = 1e-10;

/// Tolerance on `|η'z| / (‖η‖ ‖z‖)` before `z` is re-orthogonalized.
pub const ORTHO_TOL: f64 = 1e-8;

/// Default cap on `|m|` for sign enumeration.
pub const DEFAULT_CAP: usize = 20;

/// Sign vectors are stored as `±1` bytes.
pub type Signs = Vec<i8>;

/// The contrast `η` of a target `η'μ`, with `c = η / ‖η‖²`.
#[derive(Debug, Clone)]
pub struct Contrast {
    model: Vec<usize>,
    gamma: Vec<f64>,
    /// `(X_m'X_m)⁻¹ γ`; empty for contrasts built directly from `η`.
    kgamma: Vec<f64>,
    eta: Vec<f64>,
    c: Vec<f64>,
    eta_sq: f64,
    sigma2: f64,
}

/// `η = X_m (X_m'X_m)⁻¹ γ` for the target `γ'β^m`.
pub fn make_contrast(x: &Matrix, model: &[usize], gamma: &[f64], sigma2: f64) -> Result<Contrast> {
    if model.is_empty() {
        return Err(domain!("contrast needs a nonempty model"));
    }
    if gamma.len() != model.len() {
        return Err(domain!("gamma has length {}, model has {}", gamma.len(), model.len()));
    }
    if gamma.iter().all(|&g| g == 0.0) || gamma.iter().any(|g| !g.is_finite()) {
        return Err(domain!("gamma must be finite and nonzero"));
    }
    check_sigma2(sigma2)?;
    check_model(x, model)?;
    let xm = x.select_columns(model);
    let qr = Qr::new(&xm).map_err(|e| domain!("{e}"))?;
    let kgamma = qr.gram_solve(gamma);
    let eta = xm.mul_vec(&kgamma);
    let mut c = Contrast::from_eta(eta, sigma2)?;
    c.model = model.to_vec();
    c.gamma = gamma.to_vec();
    c.kgamma = kgamma;
    Ok(c)
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(domain!("sigma2 must be positive and finite, got {sigma2}"));
    }
    Ok(())
}

fn check_model(x: &Matrix, model: &[usize]) -> Result<()> {
    if model.windows(2).any(|w| w[0] >= w[1]) || model.iter().any(|&j| j >= x.cols()) {
        return Err(domain!("model must be strictly increasing indices below {}", x.cols()));
    }
    Ok(())
}

impl Contrast {
    /// A contrast given directly by `η`, for user-supplied polyhedra.
    pub fn from_eta(eta: Vec<f64>, sigma2: f64) -> Result<Self> {
        check_sigma2(sigma2)?;
        let eta_sq = dot(&eta, &eta);
        if !(eta_sq > 0.0 && eta_sq.is_finite()) {
            return Err(domain!("eta must be finite and nonzero"));
        }
        let c = eta.iter().map(|e| e / eta_sq).collect();
        Ok(Self {
            model: Vec::new(),
            gamma: Vec::new(),
            kgamma: Vec::new(),
            eta,
            c,
            eta_sq,
            sigma2,
        })
    }

    pub fn model(&self) -> &[usize] {
        &self.model
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// `(X_m'X_m)⁻¹ γ`.
    pub fn kgamma(&self) -> &[f64] {
        &self.kgamma
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// `‖η‖²`.
    pub fn eta_sq(&self) -> f64 {
        self.eta_sq
    }

    /// `σ_m² = σ² ‖η‖²`, the variance of `η'Y`.
    pub fn sigma_m2(&self) -> f64 {
        self.sigma2 * self.eta_sq
    }

    /// `η'μ`.
    pub fn target(&self, mu: &[f64]) -> f64 {
        dot(&self.eta, mu)
    }

    /// `(η'y, (I - P_η) y)`.
    pub fn split(&self, y: &[f64]) -> (f64, Vec<f64>) {
        let w = dot(&self.eta, y);
        let mut z = y.to_vec();
        axpy(-w, &self.c, &mut z);
        (w, z)
    }

    /// Returns `z` unchanged if it is orthogonal to `η` within tolerance,
    /// otherwise its projection onto `η⊥`.
    pub fn orthogonalize(&self, z: &[f64]) -> Vec<f64> {
        let ez = dot(&self.eta, z);
        if ez.abs() <= ORTHO_TOL * libm::sqrt(self.eta_sq) * norm2(z) {
            z.to_vec()
        } else {
            self.split(z).1
        }
    }
}

/// Where a polyhedron came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    LassoEvent { model: Vec<usize>, signs: Signs },
    UserSupplied,
}

/// Open polyhedron `{y : A y < b}`.
#[derive(Debug, Clone)]
pub struct Polyhedron {
    a: Matrix,
    b: Vec<f64>,
    provenance: Provenance,
}

impl Polyhedron {
    /// A user-supplied polyhedron. `a` may have zero rows (the whole space).
    pub fn new(a: Matrix, b: Vec<f64>) -> Result<Self> {
        if a.rows() != b.len() {
            return Err(domain!("A has {} rows but b has {} entries", a.rows(), b.len()));
        }
        if a.as_col_major().iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(domain!("polyhedron data must be finite"));
        }
        Ok(Self {
            a,
            b,
            provenance: Provenance::UserSupplied,
        })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn n_constraints(&self) -> usize {
        self.b.len()
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    /// `b - A y`.
    pub fn slack(&self, y: &[f64]) -> Vec<f64> {
        let ay = self.a.mul_vec(y);
        self.b.iter().zip(&ay).map(|(b, a)| b - a).collect()
    }

    /// Strict membership `A y < b`.
    pub fn contains(&self, y: &[f64]) -> bool {
        self.slack(y).iter().all(|&s| s > 0.0)
    }
}

/// The Lasso selection event `{m̂ = m, ŝ = s}` as a polyhedron.
pub fn build_event_polyhedron(x: &Matrix, lambda: f64, model: &[usize], signs: &[i8]) -> Result<Polyhedron> {
    let (n, p) = (x.rows(), x.cols());
    if model.is_empty() {
        return Err(domain!("event polyhedron needs a nonempty model"));
    }
    if signs.len() != model.len() || signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(domain!("signs must be ±1 with one entry per model index"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain!("lambda must be positive and finite, got {lambda}"));
    }
    check_model(x, model)?;
    let k = model.len();
    let xm = x.select_columns(model);
    let qr = Qr::new(&xm).map_err(|e| domain!("{e}"))?;
    let s: Vec<f64> = signs.iter().map(|&v| f64::from(v)).collect();
    let ks = qr.gram_solve(&s);
    let xm_ks = xm.mul_vec(&ks);
    let inactive = complement(model, p);
    let q = 2 * inactive.len() + k;
    let mut a = Matrix::zeros(q, n);
    let mut b = vec![0.0; q];
    let ni = inactive.len();
    for (r, &j) in inactive.iter().enumerate() {
        let xj = x.col(j);
        let res = qr.residual(xj);
        let g = dot(xj, &xm_ks);
        for (col, &v) in res.iter().enumerate() {
            a.set(r, col, v / lambda);
            a.set(ni + r, col, -v / lambda);
        }
        b[r] = 1.0 - g;
        b[ni + r] = 1.0 + g;
    }
    // rows of K X_m' are the columns of X_m K
    let mut e = vec![0.0; k];
    for i in 0..k {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[i] = 1.0;
        let ki = qr.gram_solve(&e);
        let row = xm.mul_vec(&ki);
        for (col, &v) in row.iter().enumerate() {
            a.set(2 * ni + i, col, -s[i] * v);
        }
        b[2 * ni + i] = -lambda * s[i] * ks[i];
    }
    Ok(Polyhedron {
        a,
        b,
        provenance: Provenance::LassoEvent {
            model: model.to_vec(),
            signs: signs.to_vec(),
        },
    })
}

/// Sorted indices of `0..p` not in `model`.
pub fn complement(model: &[usize], p: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(p.saturating_sub(model.len()));
    let mut it = model.iter().peekable();
    for j in 0..p {
        if it.peek() == Some(&&j) {
            it.next();
        } else {
            out.push(j);
        }
    }
    out
}

/// Section of a polyhedron along `z + c w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSection {
    pub v_minus: f64,
    pub v_plus: f64,
    pub v_zero: f64,
}

impl LineSection {
    pub const UNCONSTRAINED: Self = Self {
        v_minus: f64::NEG_INFINITY,
        v_plus: f64::INFINITY,
        v_zero: f64::INFINITY,
    };

    pub fn is_nonempty(&self) -> bool {
        self.v_minus < self.v_plus && self.v_zero > 0.0
    }

    /// `(V⁻, V⁺)` when the section is nonempty.
    pub fn interval(&self) -> Option<(f64, f64)> {
        self.is_nonempty().then_some((self.v_minus, self.v_plus))
    }

    #[inline]
    fn add_row(&mut self, ac: f64, slack: f64, zero: bool) {
        if zero {
            self.v_zero = self.v_zero.min(slack);
        } else if ac < 0.0 {
            self.v_minus = self.v_minus.max(slack / ac);
        } else {
            self.v_plus = self.v_plus.min(slack / ac);
        }
    }
}

/// Section of `poly` along `z + c w`, with `z` re-orthogonalized to `η` if
/// needed.
pub fn line_section(poly: &Polyhedron, contrast: &Contrast, z: &[f64]) -> LineSection {
    let z = contrast.orthogonalize(z);
    let c = contrast.c();
    let c_norm = norm2(c);
    let a = poly.a();
    let ac = a.mul_vec(c);
    let az = a.mul_vec(&z);
    let mut sec = LineSection::UNCONSTRAINED;
    for i in 0..poly.n_constraints() {
        let row_norm = libm::sqrt((0..a.cols()).map(|j| a.get(i, j) * a.get(i, j)).sum());
        let zero = ac[i].abs() <= ZERO_ROW_TOL * row_norm * c_norm;
        sec.add_row(ac[i], poly.b()[i] - az[i], zero);
    }
    sec
}

/// Sign-independent pieces of all event sections for a fixed model,
/// contrast and `z`, so that sections for many sign vectors cost
/// `O(|m| + p)` each.
#[derive(Debug, Clone)]
pub struct EventGeometry {
    lambda: f64,
    /// `K = (X_m'X_m)⁻¹`.
    k: Matrix,
    /// `X_{mᶜ}'X_m K`, built on first enumeration.
    g: Option<Matrix>,
    xm: Matrix,
    x_inactive: Matrix,
    /// `K γ`.
    d: Vec<f64>,
    /// `K X_m' z`.
    h: Vec<f64>,
    /// `X_{mᶜ}'(I - P) z / λ`.
    r: Vec<f64>,
    /// Rows of `A¹` parallel to the line.
    zero: Vec<bool>,
    eta_sq: f64,
}

impl EventGeometry {
    pub fn new(x: &Matrix, lambda: f64, contrast: &Contrast, z: &[f64]) -> Result<Self> {
        let model = contrast.model();
        if model.is_empty() {
            return Err(domain!("event geometry needs a contrast built from a model"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(domain!("lambda must be positive and finite, got {lambda}"));
        }
        if z.len() != x.rows() {
            return Err(domain!("z has length {}, expected {}", z.len(), x.rows()));
        }
        let z = contrast.orthogonalize(z);
        let xm = x.select_columns(model);
        let qr = Qr::new(&xm).map_err(|e| domain!("{e}"))?;
        let k = qr.gram_inverse();
        let inactive = complement(model, x.cols());
        let x_inactive = x.select_columns(&inactive);
        let resid_z = qr.residual(&z);
        let r = x_inactive.tr_mul_vec(&resid_z).into_iter().map(|v| v / lambda).collect();
        let h = k.mul_vec(&xm.tr_mul_vec(&z));
        let d = contrast.kgamma().to_vec();
        let eta_sq = contrast.eta_sq();
        let eta_norm = libm::sqrt(eta_sq);
        let zero = (0..model.len())
            .map(|i| d[i].abs() <= ZERO_ROW_TOL * libm::sqrt(k.get(i, i)) * eta_norm)
            .collect();
        Ok(Self {
            lambda,
            k,
            g: None,
            xm,
            x_inactive,
            d,
            h,
            r,
            zero,
            eta_sq,
        })
    }

    pub fn model_size(&self) -> usize {
        self.d.len()
    }

    /// `(X_m'X_m)⁻¹ γ`.
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Indices `i` whose `A¹` row is parallel to the line for every sign.
    pub fn zero_rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.zero.iter().enumerate().filter(|(_, &z)| z).map(|(i, _)| i)
    }

    fn sign_vec(signs: &[i8]) -> Vec<f64> {
        signs.iter().map(|&v| f64::from(v)).collect()
    }

    /// `(K s, X_{mᶜ}'X_m K s)` by matrix-vector products.
    fn sign_terms(&self, s: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let v = self.k.mul_vec(s);
        let u = self.xm.mul_vec(&v);
        let gs = self.x_inactive.tr_mul_vec(&u);
        (v, gs)
    }

    fn section_from(&self, s: &[f64], v: &[f64], gs: &[f64]) -> LineSection {
        let mut sec = LineSection::UNCONSTRAINED;
        for (gj, rj) in gs.iter().zip(&self.r) {
            sec.v_zero = sec.v_zero.min(1.0 - (gj + rj).abs());
        }
        for i in 0..s.len() {
            let t = self.h[i] - self.lambda * v[i];
            if self.zero[i] {
                sec.v_zero = sec.v_zero.min(s[i] * t);
            } else {
                let ratio = -self.eta_sq * t / self.d[i];
                if s[i] * self.d[i] > 0.0 {
                    sec.v_minus = sec.v_minus.max(ratio);
                } else {
                    sec.v_plus = sec.v_plus.min(ratio);
                }
            }
        }
        sec
    }

    /// Section of the event for `signs`.
    pub fn section(&self, signs: &[i8]) -> Result<LineSection> {
        if signs.len() != self.model_size() || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(domain!("signs must be ±1 with one entry per model index"));
        }
        let s = Self::sign_vec(signs);
        let (v, gs) = self.sign_terms(&s);
        Ok(self.section_from(&s, &v, &gs))
    }

    fn ensure_g(&mut self) {
        if self.g.is_none() {
            let cross = self.x_inactive.transpose().matmul(&self.xm);
            self.g = Some(cross.matmul(&self.k));
        }
    }

    /// Visits every sign vector in Gray-code order with its section.
    /// Stops early when `f` breaks.
    pub fn for_each_section<F>(&mut self, cap: usize, mut f: F) -> Result<()>
    where
        F: FnMut(&[i8], LineSection) -> ControlFlow<()>,
    {
        const RESYNC: u64 = 1024;
        let k = self.model_size();
        if k > cap || k >= 63 {
            return Err(Error::Capacity { size: k, cap });
        }
        self.ensure_g();
        let g = self.g.as_ref().expect("built above");
        let mut signs: Signs = vec![1; k];
        let mut s = vec![1.0; k];
        let (mut v, mut gs) = self.sign_terms(&s);
        for step in 0..(1u64 << k) {
            if step > 0 {
                let i = step.trailing_zeros() as usize;
                signs[i] = -signs[i];
                s[i] = -s[i];
                if step % RESYNC == 0 {
                    (v, gs) = self.sign_terms(&s);
                } else {
                    let two_s = 2.0 * s[i];
                    axpy(two_s, self.k.col(i), &mut v);
                    axpy(two_s, g.col(i), &mut gs);
                }
            }
            if f(&signs, self.section_from(&s, &v, &gs)).is_break() {
                break;
            }
        }
        Ok(())
    }

    /// `T_m(z)`: the union of all nonempty sections.
    pub fn truncation_union(&mut self, cap: usize) -> Result<IntervalUnion> {
        let mut pieces = Vec::new();
        self.for_each_section(cap, |_, sec| {
            if let Some(iv) = sec.interval() {
                pieces.push(iv);
            }
            ControlFlow::Continue(())
        })?;
        IntervalUnion::new(pieces).map_err(|_| domain!("no sign vector has a nonempty section at this z"))
    }

    /// Whether `T_m(z)` is unbounded above and below, by exhaustive
    /// enumeration that stops once both are established.
    pub fn union_unboundedness(&mut self, cap: usize) -> Result<Unboundedness> {
        let mut out = Unboundedness { above: false, below: false };
        self.for_each_section(cap, |_, sec| {
            if sec.is_nonempty() {
                out.above |= sec.v_plus == f64::INFINITY;
                out.below |= sec.v_minus == f64::NEG_INFINITY;
            }
            if out.above && out.below {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
        Ok(out)
    }

    /// Unboundedness of `T_m(z)` from the sign vectors that can produce an
    /// unbounded section: `s_i = sign(d_i)` (above) or `-sign(d_i)` (below)
    /// on rows not parallel to the line, both signs on parallel rows.
    pub fn unboundedness_probe(&self) -> Unboundedness {
        let free: Vec<usize> = self.zero_rows().collect();
        let side = |dir: f64| -> bool {
            let mut s: Vec<f64> = (0..self.model_size())
                .map(|i| if self.zero[i] { 1.0 } else { dir * self.d[i].signum() })
                .collect();
            // free rows are rare; enumerate them directly
            let combos = 1u64 << free.len().min(62);
            (0..combos).any(|mask| {
                for (bit, &i) in free.iter().enumerate() {
                    s[i] = if mask >> bit & 1 == 1 { -1.0 } else { 1.0 };
                }
                let (v, gs) = self.sign_terms(&s);
                self.section_from(&s, &v, &gs).is_nonempty()
            })
        };
        Unboundedness {
            above: side(1.0),
            below: side(-1.0),
        }
    }
}

/// Which directions a truncation set extends to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unboundedness {
    pub above: bool,
    pub below: bool,
}

impl Unboundedness {
    pub fn bounded_somewhere(&self) -> bool {
        !(self.above && self.below)
    }
}

/// `T_m(z)` for the model of `contrast`.
pub fn truncation_union(
    x: &Matrix,
    lambda: f64,
    contrast: &Contrast,
    z: &[f64],
    cap: usize,
) -> Result<IntervalUnion> {
    let k = contrast.model().len();
    if k > cap {
        return Err(Error::Capacity { size: k, cap });
    }
    EventGeometry::new(x, lambda, contrast, z)?.truncation_union(cap)
}

/// `T_{m,s}(z)` for a single sign vector; `None` if the section is empty.
pub fn sign_truncation(
    x: &Matrix,
    lambda: f64,
    contrast: &Contrast,
    signs: &[i8],
    z: &[f64],
) -> Result<Option<IntervalUnion>> {
    let sec = EventGeometry::new(x, lambda, contrast, z)?.section(signs)?;
    Ok(sec.interval().map(|(a, b)| IntervalUnion::new([(a, b)]).expect("nonempty section")))
}

pub fn unboundedness_probe(x: &Matrix, lambda: f64, contrast: &Contrast, z: &[f64]) -> Result<Unboundedness> {
    Ok(EventGeometry::new(x, lambda, contrast, z)?.unboundedness_probe())
}
