//! The transform `S = R[𝔠_R/x_1]`: adjoin `T_j = t^(b_j)` for the gaps
//! `b_j ∈ [c - a_1, c - 1]` and present `S` by
//! `ker Φ + (X_i T_j - g_ij, T_k T_l - h_kl)` with `g_ij, h_kl ∈ m²`.

use serde::Serialize;

use crate::curve::CurveRing;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::series::TruncatedSeries;
use crate::Rational;

#[derive(Clone, Debug)]
pub struct TransformRing {
    pub base: CurveRing,
    pub b: Vec<usize>,
    /// `S` on the generators `(x_1, ..., x_n, T_1, ..., T_s)`.
    pub view: CurveRing,
    /// `g[i][j]` with `x_i T_j = g_ij(x)`.
    pub g: Vec<Vec<Poly>>,
    /// `h[k][l - k]` with `T_k T_l = h_kl(x)` for `k <= l`.
    pub h: Vec<Vec<Poly>>,
}

impl TransformRing {
    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn s(&self) -> usize {
        self.b.len()
    }

    pub fn h(&self, k: usize, l: usize) -> &Poly {
        let (k, l) = if k <= l { (k, l) } else { (l, k) };
        &self.h[k][l - k]
    }

    /// Variable names `x1..xn, T1..Ts`.
    pub fn names(&self) -> Vec<String> {
        (1..=self.n())
            .map(|i| format!("x{i}"))
            .chain((1..=self.s()).map(|j| format!("T{j}")))
            .collect()
    }

    /// Relations of `S` in `X_1..X_n, T_1..T_s`: the given relations of `R`
    /// followed by `X_i T_j - g_ij` and `T_k T_l - h_kl`.
    pub fn relations(&self, r_relations: &[Poly]) -> Vec<Poly> {
        let n = self.n();
        let ns = n + self.s();
        let mut out: Vec<Poly> = r_relations.iter().map(|f| f.extend_vars(ns)).collect();
        let neg = -Rational::from_integer(1.into());
        for j in 0..self.s() {
            for i in 0..n {
                let mut f = Poly::var(ns, i).mul_var(n + j);
                f.add_scaled(&neg, &self.g[i][j].extend_vars(ns));
                out.push(f);
            }
        }
        for k in 0..self.s() {
            for l in k..self.s() {
                let mut f = Poly::var(ns, n + k).mul_var(n + l);
                f.add_scaled(&neg, &self.h(k, l).extend_vars(ns));
                out.push(f);
            }
        }
        out
    }
}

/// Builds `S = R[𝔠_R/x_1]`. Since `𝔠_R/x_1 = t^(c - a_1) k[[t]]` in any
/// parametrization, `S = R + Σ k t^(b_j)` and `x_1` need not be monomial.
pub fn build_transform(r: &CurveRing) -> Result<TransformRing> {
    if !r.conductor_in_m_squared()? {
        return Err(Error::ConductorNotInMSquared);
    }
    let base = r.clone();
    let c = base.conductor();
    let p = base.precision();
    let b = base.profile().reduced_type_exponents.clone();
    let mut gens: Vec<TruncatedSeries> = base.generators().to_vec();
    gens.extend(b.iter().map(|&e| TruncatedSeries::t_pow(e, p)));
    let view = if base.is_exact() {
        CurveRing::analyze_at(&gens, p)?
    } else {
        CurveRing::from_truncated(&gens)?
    };

    let witness = |f: &TruncatedSeries, what: String| -> Result<Poly> {
        let w = base.membership_with_witness(f, true)?;
        let v = base.evaluator().eval(&w).order().unwrap_or(p);
        if v < c {
            return Err(Error::WitnessNotInConductor {
                what,
                valuation: v,
                conductor: c,
            });
        }
        Ok(w)
    };
    let mut g = Vec::with_capacity(base.n());
    for (i, x) in base.generators().iter().enumerate() {
        let mut row = Vec::with_capacity(b.len());
        for (j, &bj) in b.iter().enumerate() {
            row.push(witness(&x.shift(bj).truncate(p), format!("g_{}{}", i + 1, j + 1))?);
        }
        g.push(row);
    }
    let mut h = Vec::with_capacity(b.len());
    for k in 0..b.len() {
        let mut row = Vec::new();
        for l in k..b.len() {
            row.push(witness(&TruncatedSeries::t_pow(b[k] + b[l], p), format!("h_{}{}", k + 1, l + 1))?);
        }
        h.push(row);
    }
    Ok(TransformRing { base, b, view, g, h })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransformProperties {
    /// `𝔠/x_1 ⊆ R̄`.
    pub quotient_integral: bool,
    /// `m_R (𝔠/x_1) ⊆ 𝔠_R`.
    pub maximal_ideal_times_quotient: bool,
    /// `(𝔠/x_1)^2 ⊆ 𝔠_R`.
    pub quotient_squared: bool,
    /// `c_S = c_R - a_1`.
    pub conductor_drop: bool,
    /// `dim_k S/R = s`.
    pub colength: bool,
    /// `edim S = n + s`.
    pub embedding_dimension: bool,
    pub conductor_s: usize,
    pub dim_s_over_r: usize,
}

impl TransformProperties {
    pub fn all_pass(&self) -> bool {
        self.quotient_integral
            && self.maximal_ideal_times_quotient
            && self.quotient_squared
            && self.conductor_drop
            && self.colength
            && self.embedding_dimension
    }
}

pub fn verify_transform_properties(tr: &TransformRing) -> TransformProperties {
    let r = &tr.base;
    let c = r.conductor();
    let a1 = r.multiplicity();
    let p = r.precision();
    let lo = c.saturating_sub(a1);
    let quotient_integral = c >= a1;
    let conductor_part = |f: &TruncatedSeries| f.order().is_none_or(|v| v >= c) && r.contains(f);
    let maximal_ideal_times_quotient = r
        .generators()
        .iter()
        .all(|g| conductor_part(&g.shift(lo).truncate(p)));
    let quotient_squared = conductor_part(&TruncatedSeries::t_pow(2 * lo, p));
    let conductor_s = tr.view.conductor();
    let dim_s_over_r = tr.view.ring_staircase().dim() - r.ring_staircase().dim();
    let embedding_dimension = tr.view.n() == r.n() + tr.s() && independent_mod_m2(&tr.view);
    TransformProperties {
        quotient_integral,
        maximal_ideal_times_quotient,
        quotient_squared,
        conductor_drop: conductor_s + a1 == c,
        colength: dim_s_over_r == tr.s(),
        embedding_dimension,
        conductor_s,
        dim_s_over_r,
    }
}

fn independent_mod_m2(r: &CurveRing) -> bool {
    let m2 = r.m2_staircase();
    let mut ech: crate::linalg::Echelon = crate::linalg::Echelon::new();
    r.generators()
        .iter()
        .all(|g| ech.push(m2.normal_form(g).as_map().clone()))
}
