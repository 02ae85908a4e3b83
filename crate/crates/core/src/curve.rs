//! The curve ring `R = k[[g_1, ..., g_n]] ⊂ k[[t]]` and its valuation data.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{kernel, Echelon, SparseVec};
use crate::poly::{monomials_of_degree, Evaluator, Poly};
use crate::series::TruncatedSeries;
use crate::staircase::Staircase;
use crate::Rational;

/// Precision above which no conductor search is attempted.
pub const PRECISION_HARD_CAP: usize = 2048;

/// Value-semigroup data of a curve, known below the working precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValueProfile {
    pub precision: usize,
    pub occupied: BTreeSet<usize>,
    pub gaps: Vec<usize>,
    pub conductor: usize,
    /// Gaps in `[c - a_1, c - 1]`: the exponents of the adjoined `T_j`.
    pub reduced_type_exponents: Vec<usize>,
}

impl ValueProfile {
    pub fn reduced_type(&self) -> usize {
        self.reduced_type_exponents.len()
    }

    pub fn is_occupied(&self, v: usize) -> bool {
        if v >= self.conductor {
            true
        } else {
            self.occupied.contains(&v)
        }
    }

    /// Occupied values below `bound` (values at or above the conductor are
    /// all occupied).
    pub fn occupied_below(&self, bound: usize) -> Vec<usize> {
        (0..bound).filter(|&v| self.is_occupied(v)).collect()
    }

    /// Minimal generators of the value semigroup.
    pub fn semigroup_generators(&self) -> Vec<usize> {
        let bound = self.conductor + self.occupied.iter().find(|&&v| v > 0).copied().unwrap_or(1);
        let elems: Vec<usize> = (1..bound).filter(|&v| self.is_occupied(v)).collect();
        elems
            .iter()
            .copied()
            .filter(|&v| {
                !elems
                    .iter()
                    .any(|&u| u < v && self.is_occupied(v - u) && v - u > 0)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct CurveRing {
    generators: Vec<TruncatedSeries>,
    exponents: Vec<usize>,
    precision: usize,
    /// Generators are exact polynomials, so the ring can be recomputed at any
    /// precision.
    exact: bool,
    ring: Staircase,
    m2: Staircase,
    profile: ValueProfile,
    /// Precisions tried while locating the conductor.
    history: Vec<usize>,
}

impl CurveRing {
    /// Analyzes a curve given by exact polynomial generators, choosing the
    /// precision by the stabilization policy: probe the value semigroup at
    /// `2 (a_1 + a_n)`, doubling until the conductor is certain, then settle on
    /// `N = 2 c + a_n + 8` and confirm the conductor and the values below
    /// `c + a_n` agree between the two runs.
    pub fn analyze(source: &[TruncatedSeries]) -> Result<Self> {
        Self::analyze_with_min_precision(source, 0)
    }

    /// As [`CurveRing::analyze`], with the final precision at least `min_precision`.
    pub fn analyze_with_min_precision(source: &[TruncatedSeries], min_precision: usize) -> Result<Self> {
        let exps = check_orders(source)?;
        let a1 = *exps.iter().min().unwrap();
        let an = *exps.iter().max().unwrap();
        let mut n0 = (2 * (a1 + an)).max(16);
        let mut history = Vec::new();
        let boot = loop {
            history.push(n0);
            let gens: Vec<TruncatedSeries> = source.iter().map(|g| g.with_precision(n0)).collect();
            match value_profile(&gens, n0, a1) {
                Ok((_, p)) => break p,
                Err(Error::PrecisionExhausted(_)) if n0 * 2 <= PRECISION_HARD_CAP => n0 *= 2,
                Err(e) => return Err(e),
            }
        };
        let c = boot.conductor;
        let target = (2 * c + an + 8).max(min_precision);
        history.push(target);
        let mut fin = Self::build(source, target, true)?;
        let window = c + an;
        let stable = fin.profile.conductor == c
            && (0..window.min(target).min(boot.precision))
                .all(|v| fin.profile.is_occupied(v) == boot.is_occupied(v));
        if !stable {
            return Err(Error::PrecisionExhausted(format!(
                "value profile changed between precisions {} and {}",
                boot.precision, target
            )));
        }
        fin.history = history;
        Ok(fin)
    }

    /// Analyzes exact polynomial generators at a fixed precision.
    pub fn analyze_at(source: &[TruncatedSeries], precision: usize) -> Result<Self> {
        check_orders(source)?;
        if let Some(a) = source.iter().filter_map(|g| g.order()).find(|&a| a >= precision) {
            return Err(Error::PrecisionExhausted(format!(
                "precision {precision} does not reach generator order {a}"
            )));
        }
        let mut r = Self::build(source, precision, true)?;
        r.history = vec![precision];
        Ok(r)
    }

    /// Analyzes generators that are only known modulo their own precision.
    pub fn from_truncated(gens: &[TruncatedSeries]) -> Result<Self> {
        check_orders(gens)?;
        let p = gens.iter().map(|g| g.precision()).min().unwrap();
        let mut r = Self::build(gens, p, false)?;
        r.history = vec![p];
        Ok(r)
    }

    /// Recomputes the ring at another precision (exact generators only).
    pub fn at_precision(&self, precision: usize) -> Result<Self> {
        if !self.exact && precision > self.precision {
            return Err(Error::PrecisionExhausted(format!(
                "generators are only known modulo t^{}",
                self.precision
            )));
        }
        let gens: Vec<TruncatedSeries> = if self.exact {
            self.generators.iter().map(|g| g.with_precision(precision)).collect()
        } else {
            self.generators.iter().map(|g| g.truncate(precision)).collect()
        };
        let mut r = Self::build(&gens, precision, self.exact)?;
        r.history = vec![precision];
        Ok(r)
    }

    fn build(source: &[TruncatedSeries], precision: usize, exact: bool) -> Result<Self> {
        let n = source.len();
        let gens: Vec<TruncatedSeries> = source
            .iter()
            .map(|g| {
                if exact {
                    g.with_precision(precision)
                } else {
                    g.truncate(precision)
                }
            })
            .collect();
        let exponents = check_orders(&gens)?;
        let a1 = *exponents.iter().min().unwrap();
        let (ring, profile) = value_profile(&gens, precision, a1)?;

        let mut seeds = Vec::new();
        for i in 0..n {
            for j in i..n {
                let mut m = vec![0u32; n];
                m[i] += 1;
                m[j] += 1;
                seeds.push((gens[i].mul_truncated(&gens[j], precision), Poly::from_monomial(m, Rational::one())));
            }
        }
        let m2 = Staircase::closure(&gens, seeds, precision);

        // Embedding dimension: the generators must be independent modulo m^2.
        if n >= 2 {
            let mut ech: Echelon = Echelon::new();
            for (i, g) in gens.iter().enumerate() {
                let nf = m2.normal_form(g);
                if !ech.push(nf.as_map().clone()) {
                    return Err(Error::RedundantGenerator { index: i + 1 });
                }
            }
        }

        Ok(Self {
            generators: gens,
            exponents,
            precision,
            exact,
            ring,
            m2,
            profile,
            history: Vec::new(),
        })
    }

    pub fn generators(&self) -> &[TruncatedSeries] {
        &self.generators
    }

    pub fn exponents(&self) -> &[usize] {
        &self.exponents
    }

    pub fn n(&self) -> usize {
        self.generators.len()
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn profile(&self) -> &ValueProfile {
        &self.profile
    }

    pub fn conductor(&self) -> usize {
        self.profile.conductor
    }

    pub fn precision_history(&self) -> &[usize] {
        &self.history
    }

    pub fn ring_staircase(&self) -> &Staircase {
        &self.ring
    }

    pub fn m2_staircase(&self) -> &Staircase {
        &self.m2
    }

    /// Smallest generator order (the multiplicity `a_1`).
    pub fn multiplicity(&self) -> usize {
        *self.exponents.iter().min().unwrap()
    }

    pub fn evaluator(&self) -> Evaluator {
        Evaluator::new(&self.generators, self.precision)
    }

    /// `dg_i/dt`.
    pub fn derivatives(&self) -> Vec<TruncatedSeries> {
        self.generators.iter().map(|g| g.derivative()).collect()
    }

    pub fn is_monomial(&self, i: usize) -> bool {
        self.generators[i].num_terms() == 1
            && self.generators[i].coeff(self.exponents[i]).is_one()
    }

    pub fn is_monomial_curve(&self) -> bool {
        (0..self.n()).all(|i| self.is_monomial(i))
    }

    pub fn contains(&self, f: &TruncatedSeries) -> bool {
        self.ring.contains(f)
    }

    /// Expresses `f` as a polynomial in the generators. With `in_m_squared`
    /// the witness is required to have no constant or linear part.
    pub fn membership_with_witness(&self, f: &TruncatedSeries, in_m_squared: bool) -> Result<Poly> {
        let w = self.ring.witness(f)?;
        if !in_m_squared {
            return Ok(w);
        }
        if w.in_m_squared() {
            return Ok(w);
        }
        self.m2.witness(f).map_err(|_| Error::ConstraintInfeasible)
    }

    /// The ideal of `R` generated by `seeds`, as a staircase with witnesses.
    pub fn ideal(&self, seeds: Vec<(TruncatedSeries, Poly)>) -> Staircase {
        Staircase::closure(&self.generators, seeds, self.precision)
    }

    fn gen_seed(&self, i: usize) -> (TruncatedSeries, Poly) {
        (self.generators[i].clone(), Poly::var(self.n(), i))
    }

    /// The principal ideal `x_1 R` (the first generator is the reduction).
    pub fn x1_ideal(&self) -> Staircase {
        self.ideal(vec![self.gen_seed(0)])
    }

    /// `(x_1, 𝔠_R)`, with the conductor generated by `t^c, ..., t^(c+a_1-1)`.
    pub fn x1_conductor_ideal(&self) -> Staircase {
        let c = self.conductor();
        let a1 = self.exponents[0];
        let mut seeds = vec![self.gen_seed(0)];
        for v in c..c + a1 {
            let f = TruncatedSeries::t_pow(v, self.precision);
            let w = self.membership_with_witness(&f, false).unwrap_or_else(|_| Poly::zero(self.n()));
            seeds.push((f, w));
        }
        self.ideal(seeds)
    }

    /// `m^k`, generated by all degree-`k` monomials in the generators.
    pub fn m_power(&self, k: u32) -> Staircase {
        let mut ev = self.evaluator();
        let seeds = monomials_of_degree(self.n(), k)
            .into_iter()
            .map(|m| (ev.monomial(&m), Poly::from_monomial(m, Rational::one())))
            .collect();
        self.ideal(seeds)
    }

    fn require_precision_for_ideals(&self) -> Result<()> {
        let need = self.conductor() + self.exponents[0];
        if self.precision < need {
            return Err(Error::PrecisionExhausted(format!(
                "ideal computations need precision >= {need}, have {}",
                self.precision
            )));
        }
        Ok(())
    }

    /// Reduced type: the number of gaps in `[c - a_1, c - 1]`.
    pub fn reduced_type(&self) -> usize {
        self.profile.reduced_type()
    }

    /// `dim_k (𝔠_R, x_1)/(x_1)` from the ideal staircases.
    pub fn reduced_type_by_ideals(&self) -> Result<usize> {
        self.require_precision_for_ideals()?;
        Ok(self.x1_conductor_ideal().dim() - self.x1_ideal().dim())
    }

    /// Cohen–Macaulay type `dim_k ((x_1) : m)/(x_1)`.
    pub fn cm_type(&self) -> Result<usize> {
        self.require_precision_for_ideals()?;
        let x1 = self.x1_ideal();
        let n = self.n();
        let p = self.precision;
        let reps: Vec<TruncatedSeries> = self
            .ring
            .elements()
            .filter(|(e, _)| !x1.has_valuation(e.order().unwrap()))
            .map(|(e, _)| e)
            .collect();
        let cols: Vec<SparseVec> = reps
            .iter()
            .map(|e| {
                let mut v = SparseVec::new();
                for (i, g) in self.generators.iter().enumerate() {
                    let nf = x1.normal_form(&e.mul_truncated(g, p));
                    for (k, c) in nf.terms() {
                        v.insert(i * p + k, c.clone());
                    }
                }
                v
            })
            .collect();
        let _ = n;
        Ok(kernel(&cols).len())
    }

    /// `(x_1) : m = (x_1, 𝔠_R)`: the reduced type equals the CM type.
    pub fn has_maximal_reduced_type(&self) -> Result<bool> {
        Ok(self.cm_type()? == self.reduced_type_by_ideals()?)
    }

    /// Decides `m^k ⊆ (x_1)` and `m^k ⊆ (x_1, 𝔠_R)`.
    pub fn power_containment(&self, k: u32) -> Result<PowerContainment> {
        self.require_precision_for_ideals()?;
        let x1 = self.x1_ideal();
        let x1c = self.x1_conductor_ideal();
        let mut ev = self.evaluator();
        let mut in_x1 = true;
        let mut in_x1_conductor = true;
        for m in monomials_of_degree(self.n(), k) {
            let f = ev.monomial(&m);
            if in_x1 && !x1.contains(&f) {
                in_x1 = false;
            }
            if in_x1_conductor && !x1c.contains(&f) {
                in_x1_conductor = false;
            }
            if !in_x1 && !in_x1_conductor {
                break;
            }
        }
        Ok(PowerContainment {
            k,
            in_x1,
            in_x1_conductor,
        })
    }

    /// True when `𝔠_R ⊆ m_R^2`.
    pub fn conductor_in_m_squared(&self) -> Result<bool> {
        self.require_precision_for_ideals()?;
        let c = self.conductor();
        Ok((c..c + self.exponents[0]).all(|v| self.m2.contains(&TruncatedSeries::t_pow(v, self.precision))))
    }

    /// Rewrites the curve in the uniformizer `s = β t` with
    /// `β^(a_r) = α_r / α_r(0)`, so that generator `r` (0-based) becomes
    /// exactly `s^(a_r)`.
    pub fn monomialize(&self, r: usize) -> Result<CurveRing> {
        if r >= self.n() {
            return Err(Error::Invalid(format!("generator index {} out of range", r + 1)));
        }
        if self.is_monomial(r) {
            return Ok(self.clone());
        }
        let gens = monomialize_generators(&self.generators, r, self.exact)?;
        let mut out = Self::build(&gens, gens.iter().map(|g| g.precision()).min().unwrap(), false)?;
        out.history = self.history.clone();
        Ok(out)
    }

    /// Replaces `g_i = α t^a + h` by `t^a` whenever `h ∈ R` and `h` is
    /// congruent modulo `m²` to a combination of the other generators; the
    /// new set still spans `m/m²`, so it generates the same ring.
    pub fn absorb_tails(&self) -> Result<CurveRing> {
        let mut cur = self.clone();
        for i in 0..self.n() {
            if cur.is_monomial(i) {
                continue;
            }
            let g = &cur.generators[i];
            let a = cur.exponents[i];
            let mut tail = g.clone();
            tail.set(a, Rational::zero());
            if !cur.contains(&tail) {
                continue;
            }
            let mut others: Echelon = Echelon::new();
            for (j, h) in cur.generators.iter().enumerate() {
                if j != i {
                    others.push(cur.m2.normal_form(h).as_map().clone());
                }
            }
            if !others.contains(cur.m2.normal_form(&tail).as_map()) {
                continue;
            }
            cur = cur.with_generator(i, TruncatedSeries::t_pow(a, g.precision()))?;
        }
        Ok(cur)
    }

    /// Replaces generator `i` (0-based) by another series, keeping the rest.
    pub fn with_generator(&self, i: usize, g: TruncatedSeries) -> Result<CurveRing> {
        let mut gens = self.generators.clone();
        gens[i] = g;
        let mut out = Self::build(&gens, self.precision, self.exact)?;
        out.history = self.history.clone();
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PowerContainment {
    pub k: u32,
    pub in_x1: bool,
    pub in_x1_conductor: bool,
}

/// The ring staircase and its value profile, provided the conductor is
/// certified below the precision.
fn value_profile(gens: &[TruncatedSeries], precision: usize, a1: usize) -> Result<(Staircase, ValueProfile)> {
    let n = gens.len();
    let ring = Staircase::closure(gens, vec![(TruncatedSeries::one(precision), Poly::one(n))], precision);
    let occupied = ring.valuations();
    // The conductor is certain once a run of a_1 consecutive values ends at
    // the precision: adding a_1 repeatedly fills everything above.
    let mut start = precision;
    while start > 0 && occupied.contains(&(start - 1)) {
        start -= 1;
    }
    if precision - start < a1 {
        return Err(Error::PrecisionExhausted(format!(
            "no conductor certified below t^{precision}"
        )));
    }
    let conductor = start;
    let gaps: Vec<usize> = (0..conductor).filter(|v| !occupied.contains(v)).collect();
    let lo = conductor.saturating_sub(a1);
    let reduced_type_exponents: Vec<usize> = (lo..conductor).filter(|v| !occupied.contains(v)).collect();
    let profile = ValueProfile {
        precision,
        occupied,
        gaps,
        conductor,
        reduced_type_exponents,
    };
    Ok((ring, profile))
}

fn check_orders(gens: &[TruncatedSeries]) -> Result<Vec<usize>> {
    if gens.is_empty() {
        return Err(Error::Invalid("a curve needs at least one generator".into()));
    }
    gens.iter()
        .enumerate()
        .map(|(i, g)| match g.order() {
            Some(0) | None => Err(Error::NotACurve { index: i + 1 }),
            Some(a) => Ok(a),
        })
        .collect()
}

/// Generators rewritten in the uniformizer that makes generator `r` a pure
/// power. Uses Lagrange–Bürmann: with `s = t u(t)^(1/a)`,
/// `[s^k] H(t(s)) = (1/k) [t^(k-1)] H'(t) u(t)^(-k/a)`.
pub fn monomialize_generators(gens: &[TruncatedSeries], r: usize, exact: bool) -> Result<Vec<TruncatedSeries>> {
    let g = &gens[r];
    let a = g.order().ok_or(Error::NotACurve { index: r + 1 })?;
    let c0 = g.coeff(a);
    let base_prec = gens.iter().map(|g| g.precision()).min().unwrap();
    // u = g / (c0 t^a), known modulo t^(N - a) unless g is exact.
    let u_prec = if exact { base_prec } else { base_prec - a };
    let out_prec = if exact { base_prec } else { base_prec - a + 1 };
    let inv_c0 = c0.recip();
    let u = TruncatedSeries::from_terms(
        g.terms().filter(|(e, _)| *e >= a).map(|(e, c)| (e - a, c * &inv_c0)),
        u_prec,
    );
    if !u.coeff(0).is_one() {
        return Err(Error::BadConstantTerm {
            found: u.coeff(0).to_string(),
        });
    }
    let derivs: Vec<TruncatedSeries> = gens.iter().map(|g| g.derivative()).collect();
    let mut coeffs: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); gens.len()];
    let a_q = Rational::from_integer(BigInt::from(a));
    for k in 1..out_prec {
        let alpha = -Rational::from_integer(BigInt::from(k)) / &a_q;
        let pk = u.rational_power_to(&alpha, k)?;
        let kq = Rational::from_integer(BigInt::from(k));
        for (i, d) in derivs.iter().enumerate() {
            if i == r {
                continue;
            }
            let mut acc = Rational::zero();
            for (j, dj) in d.terms() {
                if j > k - 1 {
                    break;
                }
                if let Some(p) = pk.coeff_ref(k - 1 - j) {
                    acc += dj * p;
                }
            }
            if !acc.is_zero() {
                coeffs[i].push((k, acc / &kq));
            }
        }
    }
    Ok(gens
        .iter()
        .enumerate()
        .map(|(i, _)| {
            if i == r {
                TruncatedSeries::t_pow(a, out_prec)
            } else {
                TruncatedSeries::from_terms(std::mem::take(&mut coeffs[i]), out_prec)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gens(lits: &[&str]) -> Vec<TruncatedSeries> {
        lits.iter().map(|l| TruncatedSeries::parse(l, 64).unwrap()).collect()
    }

    #[test]
    fn e345_profile() {
        let r = CurveRing::analyze(&gens(&["t^3", "t^4", "t^5"])).unwrap();
        assert_eq!(r.conductor(), 3);
        assert_eq!(r.profile().gaps, vec![1, 2]);
        assert_eq!(r.reduced_type(), 2);
        assert_eq!(r.cm_type().unwrap(), 2);
    }

    #[test]
    fn conductor_examples() {
        let r = CurveRing::analyze(&gens(&["t^4", "t^11", "t^17"])).unwrap();
        assert_eq!(r.conductor(), 19);
        let r = CurveRing::analyze(&gens(&["t^4+t^5", "t^7+t^10", "t^8+t^10", "t^9+t^10"])).unwrap();
        assert_eq!(r.conductor(), 7);
    }

    #[test]
    fn membership_examples() {
        let r = CurveRing::analyze(&gens(&["t^3", "t^4", "t^5"])).unwrap();
        let p = r.precision();
        let w = r.membership_with_witness(&TruncatedSeries::t_pow(7, p), false).unwrap();
        assert_eq!(w.to_string(), "X1*X2");
        assert!(matches!(
            r.membership_with_witness(&TruncatedSeries::t_pow(1, p), false),
            Err(Error::NotAMember { order: 1 })
        ));
        let r = CurveRing::analyze(&gens(&["t^4", "t^11", "t^17"])).unwrap();
        let w = r
            .membership_with_witness(&TruncatedSeries::t_pow(19, r.precision()), true)
            .unwrap();
        assert_eq!(w.to_string(), "X1^2*X2");
    }

    #[test]
    fn linear_witness_cannot_meet_constraint() {
        let r = CurveRing::analyze(&gens(&["t^3", "t^4", "t^5"])).unwrap();
        assert!(matches!(
            r.membership_with_witness(&TruncatedSeries::t_pow(4, r.precision()), true),
            Err(Error::ConstraintInfeasible)
        ));
    }

    #[test]
    fn redundant_generator_rejected() {
        assert!(matches!(
            CurveRing::analyze(&gens(&["t^2", "t^3", "t^4"])),
            Err(Error::RedundantGenerator { index: 3 })
        ));
        assert!(matches!(
            CurveRing::analyze(&gens(&["1 + t", "t^3"])),
            Err(Error::NotACurve { index: 1 })
        ));
    }

    #[test]
    fn monomialize_square() {
        let r = CurveRing::analyze(&gens(&["t^2 + t^3", "t^5"])).unwrap();
        let m = r.monomialize(0).unwrap();
        assert_eq!(m.generators()[0], TruncatedSeries::t_pow(2, m.precision()));
        assert_eq!(m.profile().occupied, r.profile().occupied.range(..m.precision()).copied().collect());
    }

    #[test]
    fn type_and_containment() {
        let r = CurveRing::analyze(&gens(&["t^2", "t^3"])).unwrap();
        assert_eq!(r.cm_type().unwrap(), 1);
        let r = CurveRing::analyze(&gens(&["t^7", "t^8", "t^9"])).unwrap();
        assert_eq!(r.cm_type().unwrap(), 2);
        assert!(r.power_containment(3).unwrap().in_x1_conductor);
        assert!(!r.power_containment(2).unwrap().in_x1_conductor);
        assert!(!r.power_containment(1).unwrap().in_x1_conductor);
        let r = CurveRing::analyze(&gens(&["t^3", "t^4", "t^5"])).unwrap();
        assert!(r.power_containment(4).unwrap().in_x1);
    }

    #[test]
    fn absorbing_tails_keeps_the_ring() {
        let r = CurveRing::analyze(&gens(&["t^8+t^9", "t^9+t^15", "t^12+t^20", "t^14"])).unwrap();
        let a = r.absorb_tails().unwrap();
        assert!(a.is_monomial(2) && a.is_monomial(3));
        assert_eq!(a.profile(), r.profile());
        assert_eq!(a.ring_staircase().dim(), r.ring_staircase().dim());
    }
}
