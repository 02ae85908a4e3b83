//! Minimal generators of the defining ideal `I = ker(k[[X]] -> R)` up to a
//! degree bound.
//!
//! For `K = D + 1` the space `I_K` of polynomials `p` of degree `2..=D` with
//! `p(g) ∈ m_R^K` is the image of `I` modulo `m^K`, and
//! `μ_D = dim I_K / (m I_K)` counts minimal generators of order at most `D`.
//! Each representative `p` is completed to an exact relation `p - q`
//! (modulo `t^N`) by a witness `q ∈ m^K`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::curve::CurveRing;
use crate::error::{Error, Result};
use crate::linalg::{kernel, Echelon, IntEchelon, SparseVec};
use crate::poly::{monomials_of_degree, Monomial, Poly};
use crate::staircase::Staircase;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Completeness {
    Stable,
    AtBound,
}

#[derive(Clone, Debug)]
pub struct RelationSet {
    pub nvars: usize,
    pub relations: Vec<Poly>,
    pub degree_bound: u32,
    pub completeness: Completeness,
    /// `μ_d` for `d = 2..=D`.
    pub counts: Vec<usize>,
    pub precision: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorCount {
    pub mu: usize,
    pub deviation: isize,
    pub lower_bound: bool,
}

impl RelationSet {
    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn minimal_generator_count(&self) -> GeneratorCount {
        let mu = self.relations.len();
        GeneratorCount {
            mu,
            deviation: mu as isize - self.nvars as isize + 1,
            lower_bound: self.completeness == Completeness::AtBound,
        }
    }
}

pub fn minimal_generator_count(rs: &RelationSet) -> GeneratorCount {
    rs.minimal_generator_count()
}

/// Precision at which degree bound `d` is exact.
pub fn required_precision(r: &CurveRing, d: u32) -> usize {
    r.conductor() + d as usize * r.multiplicity() + 1
}

/// Monomials of degree `2..=D`, ordered by degree and then grlex-descending.
struct MonomialIndex {
    list: Vec<Monomial>,
    index: BTreeMap<Monomial, usize>,
}

impl MonomialIndex {
    fn new(nvars: usize, d: u32) -> Self {
        let list: Vec<Monomial> = (2..=d).flat_map(|k| monomials_of_degree(nvars, k)).collect();
        let index = list.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Self { list, index }
    }

    fn to_vec(&self, p: &Poly) -> SparseVec {
        p.terms().map(|(m, c)| (self.index[m], c.clone())).collect()
    }

    fn to_poly(&self, nvars: usize, v: &SparseVec) -> Poly {
        let mut p = Poly::zero(nvars);
        for (&i, c) in v {
            p.add_term(self.list[i].clone(), c.clone());
        }
        p
    }
}

/// Representatives of `I_K/(m I_K)` with `K = d + 1` and the `m^K` staircase.
fn generators_at(r: &CurveRing, d: u32) -> (Vec<Poly>, Staircase) {
    let n = r.n();
    let mk = r.m_power(d + 1);
    let idx = MonomialIndex::new(n, d);
    let mut ev = r.evaluator();
    let cols: Vec<SparseVec> = idx
        .list
        .iter()
        .map(|m| mk.normal_form(&ev.monomial(m)).as_map().clone())
        .collect();
    let ik: Vec<SparseVec> = kernel(&cols);

    let mut m_ik = IntEchelon::new();
    for v in &ik {
        let p = idx.to_poly(n, v);
        for i in 0..n {
            let q = p.mul_var(i).truncate_degree(d);
            if !q.is_zero() {
                m_ik.push(idx.to_vec(&q));
            }
        }
    }
    let mut quotient: Echelon = Echelon::new();
    for v in &ik {
        quotient.push(m_ik.normal_form(v));
    }
    let reps = quotient
        .reduced_rows()
        .iter()
        .map(|v| idx.to_poly(n, v))
        .collect();
    (reps, mk)
}

/// Minimal generators of `I` of order at most `D`.
pub fn relations_up_to_degree(r: &CurveRing, d: u32) -> Result<RelationSet> {
    if d < 2 {
        return Err(Error::Invalid("degree bound must be at least 2".into()));
    }
    let need = required_precision(r, d);
    let owned;
    let r = if r.precision() < need {
        if !r.is_exact() {
            return Err(Error::PrecisionExhausted(format!(
                "degree bound {d} needs precision {need}, generators known to {}",
                r.precision()
            )));
        }
        owned = r.at_precision(need)?;
        &owned
    } else {
        r
    };
    let mut counts = Vec::new();
    for k in 2..d {
        counts.push(generators_at(r, k).0.len());
    }
    let (reps, mk) = generators_at(r, d);
    counts.push(reps.len());
    complete_relations(r, d, counts, reps, &mk)
}

/// Recomputes `rs` on `r`, a higher-precision copy of the same ring. Only
/// the top degree is redone; the per-degree counts carry over.
pub fn relations_at_precision(r: &CurveRing, rs: &RelationSet) -> Result<RelationSet> {
    let d = rs.degree_bound;
    if r.precision() < required_precision(r, d) {
        return relations_up_to_degree(r, d);
    }
    let (reps, mk) = generators_at(r, d);
    let mut counts = rs.counts.clone();
    if counts.last() != Some(&reps.len()) {
        return Err(Error::Invalid(format!(
            "relation count at degree {d} changed with precision: {:?} then {}",
            counts.last(),
            reps.len()
        )));
    }
    counts.pop();
    counts.push(reps.len());
    complete_relations(r, d, counts, reps, &mk)
}

/// Completes representatives `p` to exact relations `p - q` with `q ∈ m^K`.
fn complete_relations(r: &CurveRing, d: u32, counts: Vec<usize>, reps: Vec<Poly>, mk: &Staircase) -> Result<RelationSet> {
    let mut ev = r.evaluator();
    let mut relations = Vec::with_capacity(reps.len());
    for p in reps {
        let q = mk.witness(&ev.eval(&p))?;
        let mut f = p;
        f.add_scaled(&-Rational::from_integer(1.into()), &q);
        relations.push(f.primitive());
    }
    relations.sort_by_key(relation_key);
    let stable = is_stable(&counts, r.n());
    Ok(RelationSet {
        nvars: r.n(),
        relations,
        degree_bound: d,
        completeness: if stable { Completeness::Stable } else { Completeness::AtBound },
        counts,
        precision: r.precision(),
    })
}

fn relation_key(p: &Poly) -> (u32, u32, String) {
    (
        p.max_degree().unwrap_or(0),
        p.min_degree().unwrap_or(0),
        p.to_string(),
    )
}

/// Largest degree bound the driver tries.
pub fn degree_cap(r: &CurveRing) -> u32 {
    (r.conductor() as u32).max(4)
}

/// `μ_D = μ_(D-1) = μ_(D-2)`, and at least the `n - 1` generators any
/// curve in `n` variables needs.
fn is_stable(counts: &[usize], n: usize) -> bool {
    let l = counts.len();
    l >= 3 && counts[l - 1] == counts[l - 2] && counts[l - 2] == counts[l - 3] && counts[l - 1] + 1 >= n
}

/// Increases `D` from 2 until [`is_stable`] holds or the cap is reached.
pub fn relations_stable(r: &CurveRing, cap: Option<u32>) -> Result<RelationSet> {
    let mut cap = cap.unwrap_or_else(|| degree_cap(r)).max(2);
    if !r.is_exact() {
        while cap > 2 && r.precision() < required_precision(r, cap) {
            cap -= 1;
        }
    }
    let mut cur = r.clone();
    let mut counts: Vec<usize> = Vec::new();
    for d in 2..=cap {
        let need = required_precision(r, d);
        if cur.precision() < need {
            cur = r.at_precision(need)?;
        }
        let (reps, mk) = generators_at(&cur, d);
        counts.push(reps.len());
        if is_stable(&counts, r.n()) || d == cap {
            return complete_relations(&cur, d, counts, reps, &mk);
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::TruncatedSeries;

    fn ring(lits: &[&str]) -> CurveRing {
        let g: Vec<TruncatedSeries> = lits.iter().map(|l| TruncatedSeries::parse(l, 64).unwrap()).collect();
        CurveRing::analyze(&g).unwrap()
    }

    #[test]
    fn e345_relations() {
        let r = ring(&["t^3", "t^4", "t^5"]);
        let rs = relations_up_to_degree(&r, 3).unwrap();
        let shown: Vec<String> = rs.relations.iter().map(|p| p.to_string()).collect();
        assert_eq!(shown, vec!["X1*X3 - X2^2", "X1^2*X2 - X3^2", "X1^3 - X2*X3"]);
        assert_eq!(rs.minimal_generator_count().deviation, 1);
    }

    #[test]
    fn plane_curve_waits_for_its_first_relation() {
        let r = ring(&["t^5 + t^6 - t^7", "t^7 + 2*t^9"]);
        let rs = relations_stable(&r, None).unwrap();
        assert_eq!(rs.relations.len(), 1);
        assert_eq!(rs.counts[..3], [0, 0, 0]);
        assert_eq!(rs.relations[0].min_degree(), Some(5));
        assert_eq!(rs.completeness, Completeness::Stable);
    }

    #[test]
    fn cusp_is_a_hypersurface() {
        let r = ring(&["t^2", "t^3"]);
        let rs = relations_stable(&r, None).unwrap();
        assert_eq!(rs.completeness, Completeness::Stable);
        assert_eq!(rs.relations.len(), 1);
        assert_eq!(rs.relations[0].to_string(), "X1^3 - X2^2");
    }
}
