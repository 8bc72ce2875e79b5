//! Small dense linear algebra: a column-major matrix and Householder QR.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{domain, Error, Result};

/// Dense column-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from column-major storage.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(domain!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            ));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(n, p);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != p {
                return Err(domain!("row {i} has {} entries, expected {p}", r.len()));
            }
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn from_columns<C: AsRef<[f64]>>(cols: &[C]) -> Result<Self> {
        let p = cols.len();
        let n = cols.first().map_or(0, |c| c.as_ref().len());
        let mut data = Vec::with_capacity(n * p);
        for (j, c) in cols.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != n {
                return Err(domain!("column {j} has {} entries, expected {n}", c.len()));
            }
            data.extend_from_slice(c);
        }
        Ok(Self { rows: n, cols: p, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn as_col_major(&self) -> &[f64] {
        &self.data
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Matrix {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    /// `A v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0.0 {
                axpy(vj, self.col(j), &mut out);
            }
        }
        out
    }

    /// `Aᵀ v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), v)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `A B`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let oc = other.col(j);
            let dst = out.col_mut(j);
            for (k, &b) in oc.iter().enumerate() {
                if b != 0.0 {
                    axpy(b, &self.data[k * self.rows..(k + 1) * self.rows], dst);
                }
            }
        }
        out
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        f.write_str("]")
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Relative threshold on `|R_jj| / max |R_ii|` below which a column set is
/// declared rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Householder QR of a tall matrix with full column rank.
#[derive(Debug, Clone)]
pub struct Qr {
    /// Householder vectors below the diagonal, strict upper triangle of R above.
    packed: Matrix,
    tau: Vec<f64>,
    rdiag: Vec<f64>,
}

impl Qr {
    /// Factorizes `a`; fails if `a` is wide or numerically rank deficient.
    pub fn new(a: &Matrix) -> Result<Self> {
        let (n, k) = (a.rows(), a.cols());
        if k == 0 {
            return Err(domain!("QR of a matrix with no columns"));
        }
        if k > n {
            return Err(Error::RankDeficient(alloc::format!(
                "{k} columns exceed {n} rows"
            )));
        }
        let mut packed = a.clone();
        let mut tau = vec![0.0; k];
        let mut rdiag = vec![0.0; k];
        for j in 0..k {
            let col = &mut packed.col_mut(j)[j..];
            let norm = norm2(col);
            if norm == 0.0 {
                return Err(Error::RankDeficient(alloc::format!("column {j} is zero after elimination")));
            }
            let alpha = if col[0] > 0.0 { -norm } else { norm };
            col[0] -= alpha;
            let vtv = dot(col, col);
            tau[j] = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
            rdiag[j] = alpha;
            for c in (j + 1)..k {
                let (left, right) = packed.data.split_at_mut(c * n);
                let v = &left[j * n + j..j * n + n];
                let target = &mut right[j..n];
                let s = tau[j] * dot(v, target);
                axpy(-s, v, target);
            }
        }
        let max = rdiag.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if let Some(j) = rdiag.iter().position(|r| r.abs() <= RANK_TOL * max) {
            return Err(Error::RankDeficient(alloc::format!(
                "|R[{j},{j}]| = {:e} below {RANK_TOL:e} x {max:e}",
                rdiag[j].abs()
            )));
        }
        Ok(Self { packed, tau, rdiag })
    }

    pub fn rows(&self) -> usize {
        self.packed.rows()
    }

    pub fn cols(&self) -> usize {
        self.packed.cols()
    }

    fn householder(&self, j: usize) -> &[f64] {
        &self.packed.col(j)[j..]
    }

    /// `y ← Qᵀ y`.
    pub fn apply_qt(&self, y: &mut [f64]) {
        for j in 0..self.cols() {
            let v = self.householder(j);
            let s = self.tau[j] * dot(v, &y[j..]);
            axpy(-s, v, &mut y[j..]);
        }
    }

    /// `y ← Q y`.
    pub fn apply_q(&self, y: &mut [f64]) {
        for j in (0..self.cols()).rev() {
            let v = self.householder(j);
            let s = self.tau[j] * dot(v, &y[j..]);
            axpy(-s, v, &mut y[j..]);
        }
    }

    #[inline]
    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.rdiag[i]
        } else {
            self.packed.get(i, j)
        }
    }

    /// Solves `R x = b` in place.
    pub fn solve_r(&self, b: &mut [f64]) {
        let k = self.cols();
        for i in (0..k).rev() {
            let mut s = b[i];
            for j in (i + 1)..k {
                s -= self.r(i, j) * b[j];
            }
            b[i] = s / self.rdiag[i];
        }
    }

    /// Solves `Rᵀ x = b` in place.
    pub fn solve_rt(&self, b: &mut [f64]) {
        let k = self.cols();
        for i in 0..k {
            let mut s = b[i];
            for j in 0..i {
                s -= self.r(j, i) * b[j];
            }
            b[i] = s / self.rdiag[i];
        }
    }

    /// `(AᵀA)⁻¹ v`.
    pub fn gram_solve(&self, v: &[f64]) -> Vec<f64> {
        let mut x = v.to_vec();
        self.solve_rt(&mut x);
        self.solve_r(&mut x);
        x
    }

    /// `(AᵀA)⁻¹` as a dense symmetric matrix.
    pub fn gram_inverse(&self) -> Matrix {
        let k = self.cols();
        let mut out = Matrix::zeros(k, k);
        let mut e = vec![0.0; k];
        for j in 0..k {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let col = self.gram_solve(&e);
            out.col_mut(j).copy_from_slice(&col);
        }
        // symmetrize rounding noise
        for j in 0..k {
            for i in 0..j {
                let v = 0.5 * (out.get(i, j) + out.get(j, i));
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out
    }

    /// Least-squares coefficients `argmin ‖y - A x‖`.
    pub fn least_squares(&self, y: &[f64]) -> Vec<f64> {
        let mut w = y.to_vec();
        self.apply_qt(&mut w);
        let mut x = w[..self.cols()].to_vec();
        self.solve_r(&mut x);
        x
    }

    /// Residual of the projection onto the column space: `(I - P) y`.
    pub fn residual(&self, y: &[f64]) -> Vec<f64> {
        let mut w = y.to_vec();
        self.apply_qt(&mut w);
        w[..self.cols()].iter_mut().for_each(|x| *x = 0.0);
        self.apply_q(&mut w);
        w
    }
}

/// A vector `v` with `A v ≈ 0` and `v_j = -1` at the first column `j` that
/// lies numerically in the span of the preceding ones; `None` if the
/// columns are independent at relative tolerance `tol`.
pub fn null_vector(a: &Matrix, tol: f64) -> Option<Vec<f64>> {
    let k = a.cols();
    let scale = (0..k).fold(0.0f64, |m, j| m.max(norm2(a.col(j))));
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut members: Vec<usize> = Vec::new();
    // rcols[i]: coefficients of basis column i on earlier basis vectors, then its norm
    let mut rcols: Vec<Vec<f64>> = Vec::new();
    for j in 0..k {
        let mut v = a.col(j).to_vec();
        let mut coef = vec![0.0; basis.len()];
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let c = dot(q, &v);
                coef[i] += c;
                axpy(-c, q, &mut v);
            }
        }
        let nv = norm2(&v);
        if nv <= tol * scale {
            // back-substitute through R to express column j in original columns
            let r = basis.len();
            let mut x = coef;
            for i in (0..r).rev() {
                let mut s = x[i];
                for l in (i + 1)..r {
                    s -= rcols[l][i] * x[l];
                }
                x[i] = s / rcols[i][i];
            }
            let mut out = vec![0.0; k];
            for (i, &m) in members.iter().enumerate() {
                out[m] = x[i];
            }
            out[j] = -1.0;
            return Some(out);
        }
        v.iter_mut().for_each(|t| *t /= nv);
        let mut col = coef;
        col.push(nv);
        rcols.push(col);
        basis.push(v);
        members.push(j);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Matrix {
        Matrix::from_rows(&[[1.0, 2.0], [3.0, -1.0], [0.5, 4.0], [2.0, 2.0]]).unwrap()
    }

    #[test]
    fn qr_solves_least_squares() {
        let a = sample();
        let y = [1.0, 2.0, 3.0, 4.0];
        let qr = Qr::new(&a).unwrap();
        let beta = qr.least_squares(&y);
        // normal equations: AᵀA beta = Aᵀ y
        let g = a.transpose().matmul(&a);
        let lhs = g.mul_vec(&beta);
        let rhs = a.tr_mul_vec(&y);
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).abs() < 1e-12);
        }
        let resid = qr.residual(&y);
        for c in 0..2 {
            assert!(dot(a.col(c), &resid).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_inverse_is_inverse() {
        let a = sample();
        let qr = Qr::new(&a).unwrap();
        let k = qr.gram_inverse();
        let g = a.transpose().matmul(&a);
        let id = g.matmul(&k);
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id.get(i, j) - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn null_vector_of_dependent_columns() {
        let a = Matrix::from_rows(&[[1.0, 0.0, 2.0], [0.0, 1.0, 3.0]]).unwrap();
        let v = null_vector(&a, 1e-10).unwrap();
        let av = a.mul_vec(&v);
        assert!(av.iter().all(|x| x.abs() < 1e-12));
        assert_eq!(v[2], -1.0);
        assert!(null_vector(&sample(), 1e-10).is_none());
    }

    #[test]
    fn detects_rank_deficiency() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]).unwrap();
        assert!(matches!(Qr::new(&a), Err(Error::RankDeficient(_))));
        let wide = Matrix::zeros(1, 2);
        assert!(Qr::new(&wide).is_err());
    }
}
