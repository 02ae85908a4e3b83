//! Sparse exact linear algebra over the rationals.
//!
//! Vectors are maps from a coordinate index to a nonzero rational. An
//! [`Echelon`] keeps rows whose pivots (least coordinate) are pairwise
//! distinct, which is exactly what valuation-directed reduction needs: when
//! the coordinate is a `t`-exponent, the pivots of a subspace are its
//! valuations.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::poly::Poly;
use crate::Rational;

pub type SparseVec = BTreeMap<usize, Rational>;

pub fn unit_vec(i: usize) -> SparseVec {
    let mut v = SparseVec::new();
    v.insert(i, Rational::one());
    v
}

/// `dst += c * src`.
pub fn axpy(dst: &mut SparseVec, c: &Rational, src: &SparseVec) {
    if c.is_zero() {
        return;
    }
    for (&k, v) in src {
        let slot = dst.entry(k).or_insert_with(Rational::zero);
        *slot += c * v;
        if slot.is_zero() {
            dst.remove(&k);
        }
    }
}

pub fn scale_vec(v: &SparseVec, c: &Rational) -> SparseVec {
    if c.is_zero() {
        return SparseVec::new();
    }
    v.iter().map(|(&k, x)| (k, x * c)).collect()
}

/// Bookkeeping carried alongside each echelon row: the combination of
/// original inputs it came from.
pub trait Tag: Clone {
    fn add_scaled(&mut self, c: &Rational, other: &Self);
    fn scaled(&self, c: &Rational) -> Self;
}

impl Tag for () {
    fn add_scaled(&mut self, _: &Rational, _: &Self) {}
    fn scaled(&self, _: &Rational) -> Self {}
}

impl Tag for SparseVec {
    fn add_scaled(&mut self, c: &Rational, other: &Self) {
        axpy(self, c, other);
    }
    fn scaled(&self, c: &Rational) -> Self {
        scale_vec(self, c)
    }
}

impl Tag for Poly {
    fn add_scaled(&mut self, c: &Rational, other: &Self) {
        Poly::add_scaled(self, c, other);
    }
    fn scaled(&self, c: &Rational) -> Self {
        self.scale(c)
    }
}

#[derive(Clone, Debug)]
pub struct Echelon<T: Tag = ()> {
    rows: Vec<(SparseVec, T)>,
    pivots: BTreeMap<usize, usize>,
}

impl<T: Tag> Default for Echelon<T> {
    fn default() -> Self {
        Self {
            rows: Vec::new(),
            pivots: BTreeMap::new(),
        }
    }
}

impl<T: Tag> Echelon<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    pub fn has_pivot(&self, k: usize) -> bool {
        self.pivots.contains_key(&k)
    }

    /// Row with the given pivot; its pivot coefficient is 1.
    pub fn row_at(&self, pivot: usize) -> Option<&(SparseVec, T)> {
        self.pivots.get(&pivot).map(|&i| &self.rows[i])
    }

    pub fn rows(&self) -> impl Iterator<Item = &(SparseVec, T)> {
        self.rows.iter()
    }

    /// Head reduction: subtracts rows while the leading coordinate is a pivot.
    pub fn reduce_head(&self, v: &mut SparseVec, tag: &mut T) {
        self.reduce_head_below(v, tag, usize::MAX);
    }

    /// Head reduction that stops once the leading coordinate reaches `limit`.
    pub fn reduce_head_below(&self, v: &mut SparseVec, tag: &mut T, limit: usize) {
        while let Some((&k, c)) = v.iter().next() {
            if k >= limit {
                break;
            }
            let Some(&ri) = self.pivots.get(&k) else {
                break;
            };
            let c = -c.clone();
            let (row, rtag) = &self.rows[ri];
            axpy(v, &c, row);
            tag.add_scaled(&c, rtag);
        }
    }

    /// Full reduction: afterwards no coordinate of `v` is a pivot. The
    /// result is the unique normal form modulo the row space.
    pub fn reduce_full(&self, v: &mut SparseVec, tag: &mut T) {
        let mut cursor = 0usize;
        loop {
            let next = v
                .range(cursor..)
                .find(|(k, _)| self.pivots.contains_key(k))
                .map(|(&k, c)| (k, c.clone()));
            let Some((k, c)) = next else { break };
            let ri = self.pivots[&k];
            let c = -c;
            let (row, rtag) = &self.rows[ri];
            axpy(v, &c, row);
            tag.add_scaled(&c, rtag);
            cursor = k + 1;
        }
    }

    /// Reduces `v` and, when something nonzero remains, adds it as a new row
    /// (normalized to pivot coefficient 1). Returns the new pivot, or the
    /// vanishing tag combination when `v` was dependent.
    pub fn insert(&mut self, mut v: SparseVec, mut tag: T) -> Result<usize, T> {
        self.reduce_head(&mut v, &mut tag);
        let Some((&k, c)) = v.iter().next() else {
            return Err(tag);
        };
        let inv = c.recip();
        let v = scale_vec(&v, &inv);
        let tag = tag.scaled(&inv);
        self.pivots.insert(k, self.rows.len());
        self.rows.push((v, tag));
        Ok(k)
    }

    /// Reduced row echelon form of the row space, ordered by pivot.
    pub fn reduced_rows(&self) -> Vec<SparseVec> {
        let mut done: BTreeMap<usize, SparseVec> = BTreeMap::new();
        for (&p, &ri) in self.pivots.iter().rev() {
            let mut v = self.rows[ri].0.clone();
            let hits: Vec<(usize, Rational)> = v
                .range(p + 1..)
                .filter(|(k, _)| done.contains_key(k))
                .map(|(&k, c)| (k, c.clone()))
                .collect();
            for (k, c) in hits {
                axpy(&mut v, &-c, &done[&k]);
            }
            done.insert(p, v);
        }
        done.into_values().collect()
    }

    pub fn contains(&self, v: &SparseVec) -> bool
    where
        T: Default,
    {
        let mut v = v.clone();
        let mut t = T::default();
        self.reduce_head(&mut v, &mut t);
        v.is_empty()
    }
}

impl Echelon<()> {
    pub fn push(&mut self, v: SparseVec) -> bool {
        self.insert(v, ()).is_ok()
    }

    pub fn normal_form(&self, v: &SparseVec) -> SparseVec {
        let mut v = v.clone();
        self.reduce_full(&mut v, &mut ());
        v
    }
}

/// Integer row with strictly increasing coordinates and content 1.
type IntRow = Vec<(usize, BigInt)>;

fn primitive_row(mut v: IntRow) -> IntRow {
    let mut g = BigInt::zero();
    for (_, c) in &v {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    if v.first().is_some_and(|(_, c)| c.is_negative()) {
        g = -g;
    }
    if !g.is_one() && !g.is_zero() {
        for (_, c) in &mut v {
            *c /= &g;
        }
    }
    v
}

fn to_int_row(v: &SparseVec) -> IntRow {
    let l = v.values().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    primitive_row(v.iter().map(|(&k, c)| (k, c.numer() * (&l / c.denom()))).collect())
}

/// `a v - b w`, skipping zero results.
fn combine(a: &BigInt, v: &IntRow, b: &BigInt, w: &IntRow) -> IntRow {
    let mut out = Vec::with_capacity(v.len().max(w.len()));
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < w.len() {
        let ki = v.get(i).map_or(usize::MAX, |e| e.0);
        let kj = w.get(j).map_or(usize::MAX, |e| e.0);
        let (k, c) = if ki < kj {
            i += 1;
            (ki, a * &v[i - 1].1)
        } else if kj < ki {
            j += 1;
            (kj, -(b * &w[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (ki, a * &v[i - 1].1 - b * &w[j - 1].1)
        };
        if !c.is_zero() {
            out.push((k, c));
        }
    }
    out
}

/// Fraction-free counterpart of [`Echelon`] for rank and membership
/// queries: rows are primitive integer vectors, so no rational
/// normalization happens during elimination.
#[derive(Clone, Debug, Default)]
pub struct IntEchelon {
    rows: Vec<IntRow>,
    pivots: HashMap<usize, usize>,
}

impl IntEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut v: IntRow) -> IntRow {
        while let Some((k, q)) = v.first() {
            let Some(&ri) = self.pivots.get(k) else { break };
            let row = &self.rows[ri];
            let p = &row[0].1;
            let g = p.gcd(q);
            let (a, b) = (p / &g, q / &g);
            v = primitive_row(combine(&a, &v, &b, row));
        }
        v
    }

    pub fn push(&mut self, v: SparseVec) -> bool {
        let v = self.reduce(to_int_row(&v));
        let Some(&(k, _)) = v.first() else { return false };
        self.pivots.insert(k, self.rows.len());
        self.rows.push(v);
        true
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(to_int_row(v)).is_empty()
    }

    /// Normal form modulo the row space, up to a nonzero scalar.
    pub fn normal_form(&self, v: &SparseVec) -> SparseVec {
        let mut v = to_int_row(v);
        let mut from = 0usize;
        while let Some(pos) = v[from..].iter().position(|(k, _)| self.pivots.contains_key(k)) {
            let pos = from + pos;
            let row = &self.rows[self.pivots[&v[pos].0]];
            let g = row[0].1.gcd(&v[pos].1);
            let (a, b) = (&row[0].1 / &g, &v[pos].1 / &g);
            v = primitive_row(combine(&a, &v, &b, row));
            from = pos;
        }
        v.into_iter().map(|(k, c)| (k, Rational::from_integer(c))).collect()
    }
}

/// Basis of the kernel of the linear map sending the `i`-th standard basis
/// vector to `columns[i]`. Each kernel vector is indexed by column.
///
/// Elimination is fraction-free on the columns augmented by identity tags
/// placed past the largest column coordinate.
pub fn kernel(columns: &[SparseVec]) -> Vec<SparseVec> {
    let offset = columns.iter().filter_map(|c| c.keys().next_back()).max().map_or(0, |&k| k + 1);
    let mut ech = IntEchelon::new();
    let mut out = Vec::new();
    for (i, col) in columns.iter().enumerate() {
        let mut v = col.clone();
        v.insert(offset + i, Rational::one());
        let v = ech.reduce(to_int_row(&v));
        match v.first() {
            Some(&(k, _)) if k < offset => {
                ech.pivots.insert(k, ech.rows.len());
                ech.rows.push(v);
            }
            _ => out.push(
                v.into_iter()
                    .map(|(k, c)| (k - offset, Rational::from_integer(c)))
                    .collect(),
            ),
        }
    }
    out
}

pub fn rank(vectors: &[SparseVec]) -> usize {
    let mut ech: Echelon = Echelon::new();
    for v in vectors {
        ech.push(v.clone());
    }
    ech.rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[(usize, i64)]) -> SparseVec {
        entries
            .iter()
            .map(|&(k, c)| (k, Rational::from_integer(BigInt::from(c))))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    #[test]
    fn kernel_of_dependent_columns() {
        let cols = vec![v(&[(0, 1), (1, 2)]), v(&[(0, 2), (1, 4)]), v(&[(1, 1)])];
        let ker = kernel(&cols);
        assert_eq!(ker.len(), 1);
        // 2*c0 - c1 = 0
        let mut sum = SparseVec::new();
        for (&i, c) in &ker[0] {
            axpy(&mut sum, c, &cols[i]);
        }
        assert!(sum.is_empty());
        assert_eq!(rank(&cols), 2);
    }

    #[test]
    fn normal_form_is_unique() {
        let mut e = Echelon::new();
        e.push(v(&[(0, 1), (2, 1)]));
        e.push(v(&[(1, 1), (2, -1)]));
        let a = e.normal_form(&v(&[(0, 1), (1, 1)]));
        assert!(a.is_empty());
        let b = e.normal_form(&v(&[(2, 3)]));
        assert_eq!(b, v(&[(2, 3)]));
    }

    #[test]
    fn integer_echelon_matches_rational_rank() {
        let half = Rational::new(BigInt::from(1), BigInt::from(2));
        let mut a: SparseVec = v(&[(0, 3), (1, 1)]);
        a.insert(2, half);
        let rows = vec![a.clone(), v(&[(1, 2), (2, 5)]), scale_vec(&a, &Rational::from_integer(BigInt::from(-4)))];
        let mut e = IntEchelon::new();
        let pushed: Vec<bool> = rows.iter().map(|r| e.push(r.clone())).collect();
        assert_eq!(pushed, vec![true, true, false]);
        assert_eq!(e.rank(), rank(&rows));
        assert!(e.contains(&v(&[(0, 6), (1, 4), (2, 6)])));
        assert!(!e.contains(&v(&[(2, 1)])));
        let mut q = Echelon::new();
        for r in &rows {
            q.push(r.clone());
        }
        let x = v(&[(0, 1), (1, 3), (2, 7), (3, 2)]);
        let (a, b) = (e.normal_form(&x), q.normal_form(&x));
        let ratio = &b[&3] / &a[&3];
        assert_eq!(scale_vec(&a, &ratio), b);
    }
}
