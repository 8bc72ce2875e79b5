use alloc::vec::Vec;
use core::fmt;

use crate::error::{domain, Result};

/// A finite union of disjoint open intervals `(a_1, b_1) ∪ … ∪ (a_K, b_K)`
/// with `a_1 < b_1 < a_2 < … < b_K`. Endpoints may be `±∞`.
///
/// Construction normalizes its input: empty pieces are dropped, and pieces
/// that overlap or touch are merged. Merging across a shared endpoint changes
/// the set only by a single point.
#[derive(Clone, PartialEq)]
pub struct IntervalUnion {
    pieces: Vec<(f64, f64)>,
}

impl IntervalUnion {
    /// Normalizes `pieces` into a union. Pieces with `a >= b` are ignored;
    /// at least one nonempty piece must remain.
    pub fn new(pieces: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut raw = Vec::new();
        for (a, b) in pieces {
            if a.is_nan() || b.is_nan() {
                return Err(domain!("interval endpoint is NaN"));
            }
            if a == f64::INFINITY || b == f64::NEG_INFINITY {
                continue;
            }
            if a < b {
                raw.push((a, b));
            }
        }
        if raw.is_empty() {
            return Err(domain!("interval union is empty"));
        }
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match pieces.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => pieces.push((a, b)),
            }
        }
        Ok(Self { pieces })
    }

    /// A single open interval `(a, b)`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(domain!("interval ({a}, {b}) is empty"));
        }
        Self::new([(a, b)])
    }

    /// The whole real line.
    pub fn real_line() -> Self {
        Self {
            pieces: alloc::vec![(f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    /// Number of disjoint pieces `K`.
    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// `inf T = a_1`.
    pub fn lower(&self) -> f64 {
        self.pieces[0].0
    }

    /// `sup T = b_K`.
    pub fn upper(&self) -> f64 {
        self.pieces[self.pieces.len() - 1].1
    }

    pub fn bounded_above(&self) -> bool {
        self.upper() < f64::INFINITY
    }

    pub fn bounded_below(&self) -> bool {
        self.lower() > f64::NEG_INFINITY
    }

    /// `a_K - b_1`, or 0 for a single piece.
    pub fn gap_span(&self) -> f64 {
        if self.pieces.len() == 1 {
            0.0
        } else {
            self.pieces[self.pieces.len() - 1].0 - self.pieces[0].1
        }
    }

    /// Index of the piece containing `w` (open membership).
    pub fn locate(&self, w: f64) -> Option<usize> {
        let idx = self.pieces.partition_point(|&(_, b)| b <= w);
        match self.pieces.get(idx) {
            Some(&(a, _)) if a < w => Some(idx),
            _ => None,
        }
    }

    pub fn contains(&self, w: f64) -> bool {
        self.locate(w).is_some()
    }

    /// `-T = {-w : w ∈ T}`.
    pub fn reflect(&self) -> Self {
        Self {
            pieces: self.pieces.iter().rev().map(|&(a, b)| (-b, -a)).collect(),
        }
    }

    /// `T + shift`.
    pub fn shift(&self, shift: f64) -> Self {
        Self {
            pieces: self
                .pieces
                .iter()
                .map(|&(a, b)| (a + shift, b + shift))
                .collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(self.pieces.iter().chain(other.pieces.iter()).copied())
            .expect("union of nonempty sets is nonempty")
    }

    /// True if every point of `self` lies in `other` (up to shared endpoints).
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.pieces.iter().all(|&(a, b)| {
            other
                .pieces
                .iter()
                .any(|&(oa, ob)| oa <= a && b <= ob)
        })
    }

    /// Moves `w` into `T` if it lies within `tol` of the closure of `T`.
    ///
    /// Points already in `T` are returned unchanged. Points outside `T` but
    /// within `tol` of an endpoint are placed `inset` inside that endpoint
    /// (at least one ulp). Anything farther away is a domain error.
    pub fn clamp(&self, w: f64, tol: f64, inset: f64) -> Result<(usize, f64)> {
        if w.is_nan() {
            return Err(domain!("point is NaN"));
        }
        if let Some(k) = self.locate(w) {
            return Ok((k, w));
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for (k, &(a, b)) in self.pieces.iter().enumerate() {
            for (end, dir) in [(a, 1.0), (b, -1.0)] {
                if end.is_finite() {
                    let dist = (w - end).abs();
                    if dist <= tol && best.is_none_or(|(_, d, _)| dist < d) {
                        best = Some((k, dist, inward(end, dir, inset, a, b)));
                    }
                }
            }
        }
        match best {
            Some((k, _, v)) => Ok((k, v)),
            None => Err(domain!(
                "point {w} lies outside the truncation set {self:?} (tolerance {tol:e})"
            )),
        }
    }
}

fn inward(end: f64, dir: f64, inset: f64, a: f64, b: f64) -> f64 {
    let mut v = end + dir * inset;
    if v == end {
        v = if dir > 0.0 { end.next_up() } else { end.next_down() };
    }
    if v <= a || v >= b {
        // piece narrower than the inset
        v = if a.is_finite() && b.is_finite() {
            a + 0.5 * (b - a)
        } else {
            v
        };
    }
    v
}

impl fmt::Debug for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, b)) in self.pieces.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "({a}, {b})")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn merges_overlaps_and_contacts() {
        let t = IntervalUnion::new(vec![(2.0, 3.0), (-1.0, 1.0), (0.5, 2.0), (5.0, 6.0)]).unwrap();
        assert_eq!(t.pieces(), &[(-1.0, 3.0), (5.0, 6.0)]);
    }

    #[test]
    fn drops_empty_pieces_and_rejects_all_empty() {
        let t = IntervalUnion::new(vec![(1.0, 1.0), (0.0, 2.0), (3.0, -1.0)]).unwrap();
        assert_eq!(t.pieces(), &[(0.0, 2.0)]);
        assert!(IntervalUnion::new(vec![(1.0, 0.0)]).is_err());
        assert!(IntervalUnion::new(vec![(f64::NAN, 1.0)]).is_err());
    }

    #[test]
    fn locate_uses_open_membership() {
        let t = IntervalUnion::new(vec![(-3.0, -2.0), (-1.0, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(t.locate(0.0), Some(1));
        assert_eq!(t.locate(-2.5), Some(0));
        assert_eq!(t.locate(1.0), None);
        assert_eq!(t.locate(1.5), None);
        assert_eq!(t.locate(3.0), None);
        assert_eq!(t.gap_span(), 4.0);
    }

    #[test]
    fn clamp_rules() {
        let t = IntervalUnion::new(vec![(0.0, 1.0), (2.0, INF)]).unwrap();
        assert_eq!(t.clamp(0.5, 1e-9, 1e-12).unwrap(), (0, 0.5));
        let (k, v) = t.clamp(1.0 + 5e-10, 1e-9, 1e-12).unwrap();
        assert_eq!(k, 0);
        assert!(v < 1.0 && v > 1.0 - 1e-11);
        let (k, v) = t.clamp(2.0, 1e-9, 1e-12).unwrap();
        assert_eq!(k, 1);
        assert!(v > 2.0);
        assert!(t.clamp(1.5, 1e-9, 1e-12).is_err());
        // inset below one ulp still moves inside
        let far = IntervalUnion::interval(-INF, 1e8).unwrap();
        let (_, v) = far.clamp(1e8, 1.0, 1e-12).unwrap();
        assert!(v < 1e8);
    }

    #[test]
    fn reflection_and_bounds() {
        let t = IntervalUnion::new(vec![(-INF, -2.0), (-1.0, 1.0), (2.0, 3.0)]).unwrap();
        let r = t.reflect();
        assert_eq!(r.pieces(), &[(-3.0, -2.0), (-1.0, 1.0), (2.0, INF)]);
        assert!(t.bounded_above() && !t.bounded_below());
        assert!(!r.bounded_above() && r.bounded_below());
        assert!(IntervalUnion::interval(0.0, 1.0).unwrap().is_subset_of(&t.union(&r)));
    }
}
