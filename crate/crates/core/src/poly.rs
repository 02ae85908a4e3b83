//! Sparse multivariate polynomials with rational coefficients.
//!
//! Used for witness polynomials (`p(g_1, ..., g_n) = f`) and for the
//! relations of a defining ideal. Monomials are exponent vectors of a fixed
//! length.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::series::TruncatedSeries;
use crate::Rational;

pub type Monomial = Vec<u32>;

pub fn total_degree(m: &[u32]) -> u32 {
    m.iter().sum()
}

/// Graded lexicographic comparison (degree first, then lex with `X1 > X2 > ...`).
pub fn grlex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    total_degree(a)
        .cmp(&total_degree(b))
        .then_with(|| a.cmp(b))
}

/// All monomials in `nvars` variables of exactly degree `d`, in
/// descending lexicographic order.
pub fn monomials_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
    fn rec(nvars: usize, i: usize, left: u32, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if i + 1 == nvars {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            rec(nvars, i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    if nvars == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(nvars, 0, d, &mut vec![0; nvars], &mut out);
    out
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = vec![0; nvars];
        m[i] = 1;
        Self::from_monomial(m, Rational::one())
    }

    pub fn from_monomial(m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero(m.len());
        p.add_term(m, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &[u32]) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        debug_assert_eq!(m.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add_scaled(&mut self, c: &Rational, other: &Poly) {
        if c.is_zero() {
            return;
        }
        for (m, v) in &other.terms {
            self.add_term(m.clone(), v * c);
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        let mut out = Poly::zero(self.nvars);
        out.add_scaled(c, self);
        out
    }

    pub fn mul_var(&self, i: usize) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m = m.clone();
                    m[i] += 1;
                    (m, c.clone())
                })
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    /// Re-embeds into `nvars` variables (the first `self.nvars` keep their index).
    pub fn extend_vars(&self, nvars: usize) -> Poly {
        assert!(nvars >= self.nvars);
        Poly {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m = m.clone();
                    m.resize(nvars, 0);
                    (m, c.clone())
                })
                .collect(),
        }
    }

    pub fn partial(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            if m[i] > 0 {
                let mut m2 = m.clone();
                m2[i] -= 1;
                out.add_term(m2, c * Rational::from_integer(BigInt::from(m[i])));
            }
        }
        out
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| total_degree(m)).min()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| total_degree(m)).max()
    }

    /// True when the polynomial has no constant or linear term.
    pub fn in_m_squared(&self) -> bool {
        self.min_degree().is_none_or(|d| d >= 2)
    }

    /// Part of total degree `<= d`.
    pub fn truncate_degree(&self, d: u32) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| total_degree(m) <= d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&vec![0; self.nvars])
    }

    /// Coefficient of `X_i` in the linear part.
    pub fn linear_coeff(&self, i: usize) -> Rational {
        let mut m = vec![0; self.nvars];
        m[i] = 1;
        self.coeff(&m)
    }

    /// Terms in grlex-descending order.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| grlex_cmp(b.0, a.0));
        v
    }

    /// Scales to integer coefficients with content 1 whose grlex-leading
    /// coefficient is positive.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut lcm = BigInt::one();
        for c in self.terms.values() {
            lcm = lcm.lcm(c.denom());
        }
        let mut gcd = BigInt::zero();
        for c in self.terms.values() {
            let v = c.numer() * (&lcm / c.denom());
            gcd = gcd.gcd(&v);
        }
        let lead_negative = self.sorted_terms()[0].1.is_negative();
        let mut factor = Rational::new(lcm, gcd);
        if lead_negative {
            factor = -factor;
        }
        self.scale(&factor)
    }

    pub fn evaluate(&self, eval: &mut Evaluator) -> TruncatedSeries {
        eval.eval(self)
    }

    pub fn display_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, &e)| {
                    if e == 1 {
                        names[j].clone()
                    } else {
                        format!("{}^{}", names[j], e)
                    }
                })
                .collect();
            if mono.is_empty() {
                out.push_str(&a.to_string());
            } else if a.is_one() {
                out.push_str(&mono.join("*"));
            } else {
                out.push_str(&format!("{}*{}", a, mono.join("*")));
            }
        }
        out
    }
}

/// Default variable names `X1, ..., Xn`.
pub fn default_names(nvars: usize) -> Vec<String> {
    (1..=nvars).map(|i| format!("X{i}")).collect()
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&default_names(self.nvars)))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Evaluates polynomials at a fixed tuple of series, caching powers.
pub struct Evaluator {
    gens: Vec<TruncatedSeries>,
    precision: usize,
    powers: Vec<Vec<TruncatedSeries>>,
}

impl Evaluator {
    pub fn new(gens: &[TruncatedSeries], precision: usize) -> Self {
        Self {
            gens: gens.iter().map(|g| g.truncate(precision)).collect(),
            precision,
            powers: gens.iter().map(|_| Vec::new()).collect(),
        }
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    fn power(&mut self, i: usize, e: u32) -> &TruncatedSeries {
        let e = e as usize;
        let p = self.precision;
        let cache = &mut self.powers[i];
        if cache.is_empty() {
            cache.push(TruncatedSeries::one(p));
        }
        while cache.len() <= e {
            let next = cache.last().unwrap().mul_truncated(&self.gens[i], p);
            let mut next = next;
            if next.precision() < p {
                next = next.truncate(p);
            }
            cache.push(next);
        }
        &self.powers[i][e]
    }

    pub fn monomial(&mut self, m: &[u32]) -> TruncatedSeries {
        let p = self.precision;
        let mut acc = TruncatedSeries::one(p);
        for (i, &e) in m.iter().enumerate() {
            if e > 0 {
                let pw = self.power(i, e).clone();
                acc = acc.mul_truncated(&pw, p);
            }
        }
        acc.truncate(p)
    }

    pub fn eval(&mut self, poly: &Poly) -> TruncatedSeries {
        let mut acc = TruncatedSeries::zero(self.precision);
        for (m, c) in poly.terms() {
            let v = self.monomial(m);
            acc.add_scaled(c, &v);
        }
        acc.truncate(self.precision)
    }
}
