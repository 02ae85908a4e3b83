//! The Jacobian presentation `R^m -> R^n -> Ω_R -> 0`, the torsion
//! submodule `τ(Ω_R) = ker(Ω_R -> Ω_R̄)`, and nonzeroness certificates.
//!
//! Torsion is computed in a finite model. Writing `Syz` for the syzygies of
//! `(g_1', ..., g_n')` and `J` for the span of the Jacobian columns, and
//! truncating coefficients modulo `t^M` with `M >= c`,
//!
//! ```text
//! K_M = { r ∈ (R/t^M)^n : Σ r_i g_i' ≡ 0 mod t^(M + a_1 - 1) } ≅ Syz / (Syz ∩ t^M)
//! J_M = (J + t^M) / t^M
//! ```
//!
//! so `dim K_M - dim J_M` is non-decreasing in `M` and equals `ℓ(τ)` once
//! `Syz ∩ t^M ⊆ J`.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::curve::CurveRing;
use crate::error::{Error, Result};
use crate::implicitize::{relations_at_precision, RelationSet};
use crate::linalg::{kernel, Echelon, IntEchelon, SparseVec};
use crate::poly::{Evaluator, Poly};
use crate::series::TruncatedSeries;
use crate::Rational;

#[derive(Clone, Debug)]
pub struct JacobianPresentation {
    pub nvars: usize,
    pub relations: Vec<Poly>,
    /// `partials[j][i] = ∂f_j/∂X_i`.
    pub partials: Vec<Vec<Poly>>,
    /// `columns[j][i] = (∂f_j/∂X_i)(g)`.
    pub columns: Vec<Vec<TruncatedSeries>>,
    /// Relations vanish modulo `t^precision`.
    pub precision: usize,
}

impl JacobianPresentation {
    /// Largest truncation `M` at which the columns are exact modulo `t^M`.
    pub fn max_model_order(&self, r: &CurveRing) -> usize {
        (self.precision + 1).saturating_sub(r.conductor() + r.multiplicity())
    }
}

/// Differentiates and evaluates a relation set, then checks the chain rule
/// and that the matrix has rank `n - 1` at the working precision.
pub fn jacobian_presentation(rs: &RelationSet, r: &CurveRing) -> Result<JacobianPresentation> {
    presentation_from_relations(&rs.relations, r, rs.precision.min(r.precision()))
}

pub fn presentation_from_relations(relations: &[Poly], r: &CurveRing, precision: usize) -> Result<JacobianPresentation> {
    let n = r.n();
    let precision = precision.min(r.precision());
    let mut ev = Evaluator::new(r.generators(), precision);
    let partials: Vec<Vec<Poly>> = relations
        .iter()
        .map(|f| (0..n).map(|i| f.partial(i)).collect())
        .collect();
    let columns: Vec<Vec<TruncatedSeries>> = partials
        .iter()
        .map(|col| col.iter().map(|p| ev.eval(p)).collect())
        .collect();
    let derivs: Vec<TruncatedSeries> = r.generators().iter().map(|g| g.truncate(precision).derivative()).collect();
    // f(g) = 0 mod t^N only forces d/dt f(g) = 0 mod t^(N-1).
    for col in &columns {
        if !pair_with(col, &derivs).truncate(precision.saturating_sub(1)).is_zero() {
            return Err(Error::Invalid("Jacobian column fails the chain rule".into()));
        }
    }
    // A relation known modulo t^N has gradient columns accurate modulo
    // t^(N - a_n).
    let accuracy = precision.saturating_sub(*r.exponents().iter().max().unwrap());
    let rank = series_matrix_rank(
        columns
            .iter()
            .map(|col| col.iter().map(|e| e.truncate(accuracy)).collect())
            .collect(),
    );
    let expected = n - 1;
    if rank != expected {
        return Err(Error::RankDeficient { found: rank, expected });
    }
    Ok(JacobianPresentation {
        nvars: n,
        relations: relations.to_vec(),
        partials,
        columns,
        precision,
    })
}

/// `Σ c_i d_i`, at the smaller of the available precisions.
pub fn pair_with(coeffs: &[TruncatedSeries], derivs: &[TruncatedSeries]) -> TruncatedSeries {
    let p = coeffs
        .iter()
        .zip(derivs)
        .map(|(c, d)| {
            let oc = c.order().unwrap_or(c.precision());
            let od = d.order().unwrap_or(d.precision());
            (c.precision() + od).min(d.precision() + oc)
        })
        .min()
        .unwrap_or(0);
    let mut acc = TruncatedSeries::zero(p);
    for (c, d) in coeffs.iter().zip(derivs) {
        acc.add_scaled(&Rational::one(), &c.mul_truncated(d, p));
    }
    acc
}

fn divide_by_t_power(f: &TruncatedSeries, v: usize) -> TruncatedSeries {
    TruncatedSeries::from_terms(
        f.terms().filter(|(e, _)| *e >= v).map(|(e, c)| (e - v, c.clone())),
        f.precision().saturating_sub(v),
    )
}

/// Rank over `k((t))` of a matrix of truncated series (given as columns),
/// counting only pivots visible at the available precision.
pub fn series_matrix_rank(mut cols: Vec<Vec<TruncatedSeries>>) -> usize {
    let mut rank = 0;
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        for (j, col) in cols.iter().enumerate() {
            for (i, e) in col.iter().enumerate() {
                if let Some(o) = e.order() {
                    if best.is_none_or(|b| o < b.0) {
                        best = Some((o, j, i));
                    }
                }
            }
        }
        let Some((v, pj, pi)) = best else { break };
        rank += 1;
        let pivot_col = cols.swap_remove(pj);
        let unit = divide_by_t_power(&pivot_col[pi], v);
        let Ok(inv) = unit.invert_unit() else { break };
        for col in cols.iter_mut() {
            let f = divide_by_t_power(&col[pi], v).mul_series(&inv);
            let neg = -Rational::one();
            for (i, e) in col.iter_mut().enumerate() {
                let prod = f.mul_series(&pivot_col[i]);
                let p = e.precision().min(prod.precision());
                let mut out = e.truncate(p);
                out.add_scaled(&neg, &prod.truncate(p));
                *e = out;
            }
            col.remove(pi);
        }
        if cols.is_empty() || cols[0].is_empty() {
            break;
        }
    }
    rank
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VectorTag {
    TorsionCandidate,
    CertifiedNonzero,
    Zero,
}

/// `Σ c_i dX_i` with coefficients given as polynomials in the generators.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialVector {
    pub coefficients: Vec<Poly>,
    pub tag: VectorTag,
}

impl DifferentialVector {
    pub fn new(coefficients: Vec<Poly>) -> Self {
        let tag = if coefficients.iter().all(|c| c.is_zero()) {
            VectorTag::Zero
        } else {
            VectorTag::TorsionCandidate
        };
        Self { coefficients, tag }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![Poly::zero(n); n])
    }

    pub fn nvars(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| c.is_zero())
    }

    pub fn series(&self, ev: &mut Evaluator) -> Vec<TruncatedSeries> {
        self.coefficients.iter().map(|c| ev.eval(c)).collect()
    }

    /// `Σ c_i(g) g_i' ≡ 0` at the ring's precision.
    pub fn is_syzygy(&self, r: &CurveRing) -> bool {
        let mut ev = r.evaluator();
        pair_with(&self.series(&mut ev), &r.derivatives()).is_zero()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coefficients.iter().map(|p| p.scale(c)).collect())
    }

    pub fn add_scaled(&mut self, c: &Rational, other: &Self) {
        for (a, b) in self.coefficients.iter_mut().zip(&other.coefficients) {
            a.add_scaled(c, b);
        }
        self.tag = Self::new(self.coefficients.clone()).tag;
    }

    /// Integer content 1 with a positive leading coefficient.
    pub fn primitive(&self) -> Self {
        let n = self.nvars();
        let nv = self.coefficients.first().map(|p| p.nvars()).unwrap_or(0);
        let mut packed = Poly::zero(nv + n);
        for (i, c) in self.coefficients.iter().enumerate() {
            for (m, x) in c.terms() {
                let mut mm = m.clone();
                mm.resize(nv + n, 0);
                mm[nv + i] = 1;
                packed.add_term(mm, x.clone());
            }
        }
        let prim = packed.primitive();
        let mut coeffs = vec![Poly::zero(nv); n];
        for (m, x) in prim.terms() {
            let i = (0..n).find(|&i| m[nv + i] == 1).unwrap();
            coeffs[i].add_term(m[..nv].to_vec(), x.clone());
        }
        Self {
            coefficients: coeffs,
            tag: self.tag,
        }
    }

    /// Renders `Σ c_i d(name_i)`, e.g. `4*y*dx - 3*x*dy`.
    pub fn display_with(&self, names: &[String]) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (i, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = format!("d{}", names[i]);
            let body = c.display_with(names);
            let term = if c.num_terms() == 1 {
                match body.as_str() {
                    "1" => d,
                    "-1" => format!("-{d}"),
                    _ => format!("{body}*{d}"),
                }
            } else {
                format!("({body})*{d}")
            };
            parts.push(term);
        }
        if parts.is_empty() {
            return "0".into();
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            match p.strip_prefix('-') {
                Some(rest) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                None => {
                    out.push_str(" + ");
                    out.push_str(p);
                }
            }
        }
        out
    }
}

impl fmt::Display for DifferentialVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.nvars()).map(|i| format!("x{i}")).collect();
        f.write_str(&self.display_with(&names))
    }
}

/// True when `v` is provably nonzero in `Ω_{R/m²}` (hence in `Ω_R`).
/// `false` means the certificate is inconclusive.
pub fn certify_nonzero_mod_m2(v: &DifferentialVector, relations: &[Poly]) -> bool {
    let n = v.nvars();
    if v.is_zero() {
        return false;
    }
    // Coordinates: (i, 0) for 1·dX_i and (i, 1 + a) for X_a·dX_i.
    let idx = |i: usize, slot: usize| i * (n + 1) + slot;
    let truncate = |coeffs: &[Poly]| -> SparseVec {
        let mut out = SparseVec::new();
        for (i, c) in coeffs.iter().enumerate() {
            let c0 = c.constant_term();
            if !c0.is_zero() {
                out.insert(idx(i, 0), c0);
            }
            for a in 0..n {
                let ca = c.linear_coeff(a);
                if !ca.is_zero() {
                    out.insert(idx(i, 1 + a), ca);
                }
            }
        }
        out
    };
    let mut span: Echelon = Echelon::new();
    for a in 0..n {
        for b in a..n {
            let mut col = SparseVec::new();
            *col.entry(idx(a, 1 + b)).or_insert_with(Rational::zero) += Rational::one();
            *col.entry(idx(b, 1 + a)).or_insert_with(Rational::zero) += Rational::one();
            span.push(col);
        }
    }
    for f in relations {
        let partials: Vec<Poly> = (0..n).map(|i| f.partial(i)).collect();
        span.push(truncate(&partials));
    }
    let target = truncate(&v.coefficients);
    !target.is_empty() && !span.contains(&target)
}

/// `a_j x_j dx_i - a_i x_i dx_j` for two pure-monomial generators (0-based).
pub fn monomial_pair_torsion(r: &CurveRing, i: usize, j: usize, relations: &[Poly]) -> Result<DifferentialVector> {
    if i == j {
        return Err(Error::SameIndex);
    }
    for k in [i, j] {
        if r.generators()[k].num_terms() != 1 {
            return Err(Error::NotMonomial { index: k + 1 });
        }
    }
    let n = r.n();
    let q = |a: usize| Rational::from_integer(a.into());
    let mut coeffs = vec![Poly::zero(n); n];
    coeffs[i] = Poly::var(n, j).scale(&q(r.exponents()[j]));
    coeffs[j] = Poly::var(n, i).scale(&-q(r.exponents()[i]));
    let mut v = DifferentialVector::new(coeffs);
    if !v.is_syzygy(r) {
        return Err(Error::Invalid("monomial pair is not a syzygy".into()));
    }
    if certify_nonzero_mod_m2(&v, relations) {
        v.tag = VectorTag::CertifiedNonzero;
    }
    Ok(v)
}

/// The truncation model at a fixed order `M`.
#[derive(Clone, Debug)]
pub struct TorsionModel {
    pub order: usize,
    pub n: usize,
    pub k_dim: usize,
    pub j_dim: usize,
    pub length: usize,
    pub annihilator_x1_length: usize,
    /// `dim τ/mτ`.
    pub generator_count: usize,
    pub basis: Vec<DifferentialVector>,
    j_span: IntEchelon,
    m_tau: IntEchelon,
    g1: TruncatedSeries,
}

impl TorsionModel {
    fn flatten(&self, coeffs: &[TruncatedSeries]) -> SparseVec {
        flatten(coeffs, self.n, self.order)
    }

    /// True when `v` lies in the image of the Jacobian (zero in `Ω_R`) at
    /// this truncation.
    pub fn is_zero_in_omega(&self, r: &CurveRing, v: &DifferentialVector) -> bool {
        let mut ev = r.evaluator();
        let s: Vec<TruncatedSeries> = v.series(&mut ev).iter().map(|c| c.truncate(self.order)).collect();
        self.j_span.contains(&self.flatten(&s))
    }

    /// `v` satisfies the syzygy condition to the model's accuracy.
    pub fn is_syzygy(&self, r: &CurveRing, v: &DifferentialVector) -> bool {
        let mut ev = r.evaluator();
        let cap = self.order + r.multiplicity() - 1;
        let s: Vec<TruncatedSeries> = v.series(&mut ev).iter().map(|c| c.truncate(self.order)).collect();
        pair_with(&s, &r.derivatives()).truncate(cap).is_zero()
    }

    /// `v` is nonzero in `τ/mτ`, so it can be part of a minimal generating
    /// set of the torsion.
    pub fn is_minimal_generator(&self, r: &CurveRing, v: &DifferentialVector) -> bool {
        let mut ev = r.evaluator();
        let s: Vec<TruncatedSeries> = v.series(&mut ev).iter().map(|c| c.truncate(self.order)).collect();
        !self.m_tau.contains(&self.flatten(&s))
    }

    /// `x_1 v` is zero in the model.
    pub fn annihilated_by_x1(&self, r: &CurveRing, v: &DifferentialVector) -> bool {
        let mut ev = r.evaluator();
        let s: Vec<TruncatedSeries> = v
            .series(&mut ev)
            .iter()
            .map(|c| c.mul_truncated(&self.g1, self.order))
            .collect();
        self.j_span.contains(&self.flatten(&s))
    }
}

fn flatten(coeffs: &[TruncatedSeries], n: usize, m: usize) -> SparseVec {
    let mut out = SparseVec::new();
    for (i, c) in coeffs.iter().enumerate() {
        for (e, x) in c.terms() {
            if e < m {
                out.insert(e * n + i, x.clone());
            }
        }
    }
    out
}

fn unflatten(v: &SparseVec, n: usize, m: usize) -> Vec<TruncatedSeries> {
    let mut out: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
    for (&k, x) in v {
        out[k % n].push((k / n, x.clone()));
    }
    out.into_iter().map(|t| TruncatedSeries::from_terms(t, m)).collect()
}

/// Precision the ring and the relations need for a model of order `M`.
pub fn model_precision(r: &CurveRing, m: usize) -> usize {
    m + r.conductor() + r.multiplicity()
}

/// Builds the truncation model of order `m`.
pub fn torsion_at(r: &CurveRing, jp: &JacobianPresentation, m: usize) -> Result<TorsionModel> {
    model_at(r, jp, m, true)
}

/// Length-only model; the other invariants and the basis are left empty.
fn torsion_length_at(r: &CurveRing, jp: &JacobianPresentation, m: usize) -> Result<usize> {
    Ok(model_at(r, jp, m, false)?.length)
}

fn model_at(r: &CurveRing, jp: &JacobianPresentation, m: usize, full: bool) -> Result<TorsionModel> {
    let n = r.n();
    let a1 = r.multiplicity();
    if m < r.conductor() || r.precision() < m + a1 || jp.max_model_order(r) < m {
        return Err(Error::PrecisionExhausted(format!(
            "torsion model of order {m} needs precision {}, have ring {} and relations {}",
            model_precision(r, m),
            r.precision(),
            jp.precision
        )));
    }
    let cap = m + a1 - 1;
    let basis: Vec<TruncatedSeries> = r
        .ring_staircase()
        .elements()
        .map(|(e, _)| e)
        .filter(|e| e.order().unwrap() < m)
        .collect();
    let derivs = r.derivatives();

    // K_M as the kernel of (e_k, i) -> e_k g_i' mod t^(M + a_1 - 1).
    let mut cols = Vec::with_capacity(basis.len() * n);
    for e in &basis {
        for d in &derivs {
            cols.push(e.mul_truncated(d, cap).as_map().clone());
        }
    }
    let ker = kernel(&cols);
    let k_vecs: Vec<SparseVec> = ker
        .iter()
        .map(|lam| {
            let mut comps = vec![TruncatedSeries::zero(m); n];
            for (&u, c) in lam {
                comps[u % n].add_scaled(c, &basis[u / n].truncate(m));
            }
            flatten(&comps, n, m)
        })
        .collect();

    let mut j_span = IntEchelon::new();
    for e in &basis {
        for col in &jp.columns {
            let prod: Vec<TruncatedSeries> = col.iter().map(|c| e.mul_truncated(&c.truncate(m), m)).collect();
            j_span.push(flatten(&prod, n, m));
        }
    }
    // Representatives of K/J: the syzygies independent modulo J.
    let mut kj = j_span.clone();
    let reps: Vec<SparseVec> = k_vecs.iter().filter(|v| kj.push((*v).clone())).cloned().collect();
    let k_dim = k_vecs.len();
    let j_dim = j_span.rank();
    if kj.rank() != k_dim {
        return Err(Error::Invalid("Jacobian span is not contained in the syzygies".into()));
    }

    let g1 = r.generators()[0].truncate(m);
    if !full {
        return Ok(TorsionModel {
            order: m,
            n,
            k_dim,
            j_dim,
            length: reps.len(),
            annihilator_x1_length: 0,
            generator_count: 0,
            basis: Vec::new(),
            m_tau: IntEchelon::new(),
            j_span,
            g1,
        });
    }
    let mut x1_images = j_span.clone();
    for v in &reps {
        let comps: Vec<TruncatedSeries> = unflatten(v, n, m).iter().map(|c| c.mul_truncated(&g1, m)).collect();
        x1_images.push(flatten(&comps, n, m));
    }
    let annihilator_x1_length = reps.len() - (x1_images.rank() - j_dim);

    let mut m_tau = x1_images.clone();
    for v in &reps {
        let comps = unflatten(v, n, m);
        for g in &r.generators()[1..] {
            let g = g.truncate(m);
            let prod: Vec<TruncatedSeries> = comps.iter().map(|c| c.mul_truncated(&g, m)).collect();
            m_tau.push(flatten(&prod, n, m));
        }
    }
    let generator_count = k_dim - m_tau.rank();

    let st = r.ring_staircase();
    let mut basis_vectors = Vec::with_capacity(reps.len());
    for v in &reps {
        let coeffs = unflatten(v, n, m)
            .iter()
            .map(|c| st.witness(c))
            .collect::<Result<Vec<Poly>>>()?;
        basis_vectors.push(DifferentialVector::new(coeffs).primitive());
    }
    Ok(TorsionModel {
        order: m,
        n,
        k_dim,
        j_dim,
        length: reps.len(),
        annihilator_x1_length,
        generator_count,
        basis: basis_vectors,
        j_span,
        m_tau,
        g1,
    })
}

#[derive(Clone, Debug)]
pub struct TorsionResult {
    pub model: TorsionModel,
    /// `(M, ℓ)` for every model order tried.
    pub history: Vec<(usize, usize)>,
    /// The ring at the precision the final model used.
    pub ring: CurveRing,
    pub presentation: JacobianPresentation,
}

impl TorsionResult {
    pub fn length(&self) -> usize {
        self.model.length
    }

    pub fn annihilator_x1_length(&self) -> usize {
        self.model.annihilator_x1_length
    }

    pub fn basis(&self) -> &[DifferentialVector] {
        &self.model.basis
    }
}

/// Initial model order `2 c + a_n`.
pub fn initial_order(r: &CurveRing) -> usize {
    2 * r.conductor() + r.exponents().iter().max().unwrap()
}

/// Number of model pairs tried before giving up.
pub const MAX_MODEL_RUNS: usize = 4;

/// Runs the model at `M` and `M + a_1`, starting from `M = 2c + a_n` and
/// doubling `M` until the two lengths agree.
///
/// Agreement is a proof: for `M >= c`, `Syz ∩ t^(M + a_1) = x_1 (Syz ∩ t^M)`,
/// so equal lengths give `Syz ∩ t^M ⊆ J + x_1 (Syz ∩ t^M)` and Nakayama
/// gives `Syz ∩ t^M ⊆ J`. `presentation_at(N)` must return the ring and a
/// Jacobian presentation valid to precision at least `N`.
pub fn torsion_submodule<F>(r: &CurveRing, mut presentation_at: F) -> Result<TorsionResult>
where
    F: FnMut(usize) -> Result<(CurveRing, JacobianPresentation)>,
{
    let a1 = r.multiplicity();
    let mut m = initial_order(r);
    let mut history: Vec<(usize, usize)> = Vec::new();
    for _ in 0..MAX_MODEL_RUNS {
        let (ring, jp) = presentation_at(model_precision(r, m + a1))?;
        let low = torsion_length_at(&ring, &jp, m)?;
        history.push((m, low));
        let model = torsion_at(&ring, &jp, m + a1)?;
        history.push((m + a1, model.length));
        if low == model.length {
            return Ok(TorsionResult {
                model,
                history,
                ring,
                presentation: jp,
            });
        }
        m *= 2;
    }
    Err(Error::Unstable { history })
}

/// Torsion of a curve presented by an implicitized relation set; relations
/// are recomputed at the same degree bound when more precision is needed.
pub fn torsion_for_relations(r: &CurveRing, rs: &RelationSet) -> Result<TorsionResult> {
    torsion_submodule(r, |need| {
        if r.precision() >= need && rs.precision >= need {
            let jp = jacobian_presentation(rs, r)?;
            return Ok((r.clone(), jp));
        }
        let ring = r.at_precision(need.max(r.precision()))?;
        let rs2 = relations_at_precision(&ring, rs)?;
        let jp = jacobian_presentation(&rs2, &ring)?;
        Ok((ring, jp))
    })
}
