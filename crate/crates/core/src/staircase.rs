//! Valuation-echelon subspaces of `k[[t]]/t^N` that are closed under
//! multiplication by the curve generators: the ring itself, its ideals, and
//! modules such as `sum R*dg_i/dt`.
//!
//! Every row carries a witness polynomial `p` in the generator variables with
//! `p(g) = row (mod t^N)`, so membership answers come with a certificate.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::linalg::{Echelon, SparseVec};
use crate::poly::Poly;
use crate::series::TruncatedSeries;
use crate::Rational;

#[derive(Clone, Debug)]
pub struct Staircase {
    precision: usize,
    nvars: usize,
    ech: Echelon<Poly>,
}

impl Staircase {
    /// Closure of the seeds under multiplication by `gens`, modulo `t^N`.
    /// The span of the result is the `k[[gens]]`-module generated by the seeds.
    pub fn closure(
        gens: &[TruncatedSeries],
        seeds: Vec<(TruncatedSeries, Poly)>,
        precision: usize,
    ) -> Self {
        let nvars = gens.len();
        let gens: Vec<TruncatedSeries> = gens.iter().map(|g| g.truncate(precision)).collect();
        let mut ech: Echelon<Poly> = Echelon::new();
        let mut queue: VecDeque<(SparseVec, Poly)> = seeds
            .into_iter()
            .map(|(s, p)| (s.truncate(precision).as_map().clone(), p))
            .collect();
        while let Some((v, p)) = queue.pop_front() {
            if let Ok(pivot) = ech.insert(v, p) {
                let (row, witness) = ech.row_at(pivot).unwrap();
                let row = TruncatedSeries::from_map(row.clone(), precision);
                for (i, g) in gens.iter().enumerate() {
                    let prod = row.mul_truncated(g, precision);
                    if !prod.is_zero() {
                        queue.push_back((prod.as_map().clone(), witness.mul_var(i)));
                    }
                }
            }
        }
        Self {
            precision,
            nvars,
            ech,
        }
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn dim(&self) -> usize {
        self.ech.rank()
    }

    /// Valuations occupied by the subspace (all below the precision).
    pub fn valuations(&self) -> BTreeSet<usize> {
        self.ech.pivots().collect()
    }

    pub fn has_valuation(&self, v: usize) -> bool {
        self.ech.has_pivot(v)
    }

    /// The basis element of valuation `v` (normalized to leading coefficient
    /// 1) and its witness.
    pub fn element(&self, v: usize) -> Option<(TruncatedSeries, &Poly)> {
        self.ech
            .row_at(v)
            .map(|(row, p)| (TruncatedSeries::from_map(row.clone(), self.precision), p))
    }

    pub fn elements(&self) -> impl Iterator<Item = (TruncatedSeries, &Poly)> + '_ {
        self.ech
            .rows()
            .map(|(row, p)| (TruncatedSeries::from_map(row.clone(), self.precision), p))
    }

    /// Head-reduces `f` modulo `t^min(N, prec f)`. Returns the residue and the
    /// polynomial `w` with `f - residue = w(g)`.
    pub fn reduce(&self, f: &TruncatedSeries) -> (TruncatedSeries, Poly) {
        let limit = self.precision.min(f.precision());
        let mut v = f.truncate(limit).as_map().clone();
        let mut tag = Poly::zero(self.nvars);
        self.ech.reduce_head_below(&mut v, &mut tag, limit);
        let residue = TruncatedSeries::from_map(v, limit);
        (residue, tag.scale(&-Rational::from_integer(1.into())))
    }

    /// Normal form: the unique representative of `f` modulo the subspace with
    /// no term at an occupied valuation.
    pub fn normal_form(&self, f: &TruncatedSeries) -> TruncatedSeries {
        let limit = self.precision.min(f.precision());
        let mut v = f.truncate(limit).as_map().clone();
        let mut tag = Poly::zero(self.nvars);
        self.ech.reduce_full(&mut v, &mut tag);
        TruncatedSeries::from_map(v, limit)
    }

    pub fn contains(&self, f: &TruncatedSeries) -> bool {
        self.reduce(f).0.is_zero()
    }

    /// Witness `p` with `p(g) = f (mod t^min(N, prec f))`.
    pub fn witness(&self, f: &TruncatedSeries) -> Result<Poly> {
        let (res, w) = self.reduce(f);
        match res.order() {
            None => Ok(w),
            Some(order) => Err(Error::NotAMember { order }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_subring_closure() {
        let n = 30;
        let gens = vec![
            TruncatedSeries::t_pow(3, n),
            TruncatedSeries::t_pow(4, n),
            TruncatedSeries::t_pow(5, n),
        ];
        let st = Staircase::closure(&gens, vec![(TruncatedSeries::one(n), Poly::one(3))], n);
        let vals = st.valuations();
        assert!(!vals.contains(&1) && !vals.contains(&2));
        assert!((3..n).all(|v| vals.contains(&v)));
        assert_eq!(st.witness(&TruncatedSeries::t_pow(7, n)).unwrap().to_string(), "X1*X2");
        assert!(st.witness(&TruncatedSeries::t_pow(1, n)).is_err());
    }
}
