//! Truncated power series in one variable `t` over the rationals.
//!
//! A [`TruncatedSeries`] is known modulo `t^N`. Coefficients are stored
//! sparsely and zero coefficients are never stored, so two series agree
//! modulo `t^N` exactly when their truncations to `N` compare equal.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::Rational;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    coeffs: BTreeMap<usize, Rational>,
    precision: usize,
}

impl TruncatedSeries {
    pub fn zero(precision: usize) -> Self {
        Self {
            coeffs: BTreeMap::new(),
            precision,
        }
    }

    pub fn one(precision: usize) -> Self {
        Self::monomial(Rational::one(), 0, precision)
    }

    /// `c * t^e`, truncated.
    pub fn monomial(c: Rational, e: usize, precision: usize) -> Self {
        let mut s = Self::zero(precision);
        s.set(e, c);
        s
    }

    /// The pure power `t^e`.
    pub fn t_pow(e: usize, precision: usize) -> Self {
        Self::monomial(Rational::one(), e, precision)
    }

    pub fn from_terms<I>(terms: I, precision: usize) -> Self
    where
        I: IntoIterator<Item = (usize, Rational)>,
    {
        let mut s = Self::zero(precision);
        for (e, c) in terms {
            let sum = s.coeff(e) + c;
            s.set(e, sum);
        }
        s
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_int_terms(terms: &[(usize, i64)], precision: usize) -> Self {
        Self::from_terms(
            terms.iter().map(|&(e, c)| (e, Rational::from_integer(BigInt::from(c)))),
            precision,
        )
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn coeff(&self, e: usize) -> Rational {
        self.coeffs.get(&e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeff_ref(&self, e: usize) -> Option<&Rational> {
        self.coeffs.get(&e)
    }

    /// Sets a coefficient; exponents at or beyond the precision are dropped.
    pub fn set(&mut self, e: usize, c: Rational) {
        if e >= self.precision {
            return;
        }
        if c.is_zero() {
            self.coeffs.remove(&e);
        } else {
            self.coeffs.insert(e, c);
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (usize, &Rational)> + '_ {
        self.coeffs.iter().map(|(&e, c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Least exponent with a nonzero coefficient, or `None` when the series
    /// vanishes modulo `t^N` (the order is then indeterminate).
    pub fn order(&self) -> Option<usize> {
        self.coeffs.keys().next().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest stored exponent.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    /// Order used for precision bookkeeping: a vanishing series counts as
    /// `O(t^N)`.
    fn effective_order(&self) -> usize {
        self.order().unwrap_or(self.precision)
    }

    pub fn truncate(&self, precision: usize) -> Self {
        let precision = precision.min(self.precision);
        Self {
            coeffs: self
                .coeffs
                .range(..precision)
                .map(|(&e, c)| (e, c.clone()))
                .collect(),
            precision,
        }
    }

    /// Reinterprets the stored terms at a new precision. Only sound when the
    /// stored terms are known to be exact (e.g. a polynomial literal).
    pub fn with_precision(&self, precision: usize) -> Self {
        Self {
            coeffs: self
                .coeffs
                .range(..precision)
                .map(|(&e, c)| (e, c.clone()))
                .collect(),
            precision,
        }
    }

    /// Equality modulo `t^min(N, M)`.
    pub fn congruent(&self, other: &Self) -> bool {
        let p = self.precision.min(other.precision);
        self.coeffs.range(..p).eq(other.coeffs.range(..p))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.precision);
        }
        Self {
            coeffs: self.coeffs.iter().map(|(&e, v)| (e, v * c)).collect(),
            precision: self.precision,
        }
    }

    /// Multiplication by `t^k`; the precision grows by `k`.
    pub fn shift(&self, k: usize) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&e, v)| (e + k, v.clone())).collect(),
            precision: self.precision.saturating_add(k),
        }
    }

    /// `self += c * other`, with the result truncated to the smaller precision.
    pub fn add_scaled(&mut self, c: &Rational, other: &Self) {
        if other.precision < self.precision {
            self.precision = other.precision;
            let p = self.precision;
            self.coeffs.retain(|&e, _| e < p);
        }
        if c.is_zero() {
            return;
        }
        for (&e, v) in other.coeffs.range(..self.precision) {
            let slot = self.coeffs.entry(e).or_insert_with(Rational::zero);
            *slot += v * c;
            if slot.is_zero() {
                self.coeffs.remove(&e);
            }
        }
    }

    /// Product truncated to `min(N_f + ord g, N_g + ord f)`, the largest
    /// precision at which the product is determined.
    pub fn mul_series(&self, other: &Self) -> Self {
        let p = self
            .precision
            .saturating_add(other.effective_order())
            .min(other.precision.saturating_add(self.effective_order()));
        self.mul_truncated(other, p)
    }

    /// Product truncated to at most `cap`.
    pub fn mul_truncated(&self, other: &Self, cap: usize) -> Self {
        let p = cap
            .min(self.precision.saturating_add(other.effective_order()))
            .min(other.precision.saturating_add(self.effective_order()));
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (&e1, c1) in &self.coeffs {
            if e1 >= p {
                break;
            }
            for (&e2, c2) in other.coeffs.range(..p - e1) {
                let slot = acc.entry(e1 + e2).or_insert_with(Rational::zero);
                *slot += c1 * c2;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Self {
            coeffs: acc,
            precision: p,
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(self.precision.max(1));
        if k == 0 {
            return result;
        }
        let mut base = self.clone();
        let mut k = k;
        let mut first = true;
        while k > 0 {
            if k & 1 == 1 {
                result = if first {
                    base.clone()
                } else {
                    result.mul_series(&base)
                };
                first = false;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_series(&base);
            }
        }
        result
    }

    /// `d/dt`; the result is known modulo `t^(N-1)`.
    pub fn derivative(&self) -> Self {
        let p = self.precision.saturating_sub(1);
        Self {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&e, _)| e > 0 && e - 1 < p)
                .map(|(&e, c)| (e - 1, c * Rational::from_integer(BigInt::from(e))))
                .collect(),
            precision: p,
        }
    }

    /// Multiplicative inverse of a unit series.
    pub fn invert_unit(&self) -> Result<Self> {
        let f0 = match self.order() {
            Some(0) => self.coeff(0),
            other => return Err(Error::NotAUnit { order: other }),
        };
        let n = self.precision;
        let inv0 = f0.recip();
        let mut g: Vec<Rational> = Vec::with_capacity(n);
        for k in 0..n {
            if k == 0 {
                g.push(inv0.clone());
                continue;
            }
            let mut acc = Rational::zero();
            for (&j, fj) in self.coeffs.range(1..=k) {
                acc += fj * &g[k - j];
            }
            g.push(-acc * &inv0);
        }
        Ok(Self::from_dense(g, n))
    }

    /// `f^alpha` for a rational exponent, via the recurrence that follows
    /// from `f * h' = alpha * f' * h`. Requires constant coefficient 1.
    pub fn rational_power(&self, alpha: &Rational) -> Result<Self> {
        self.rational_power_to(alpha, self.precision)
    }

    pub(crate) fn rational_power_to(&self, alpha: &Rational, upto: usize) -> Result<Self> {
        let c0 = self.coeff(0);
        if !c0.is_one() {
            return Err(Error::BadConstantTerm {
                found: c0.to_string(),
            });
        }
        let n = upto.min(self.precision);
        let mut h: Vec<Rational> = Vec::with_capacity(n);
        for k in 0..n {
            if k == 0 {
                h.push(Rational::one());
                continue;
            }
            let mut acc = Rational::zero();
            let kq = Rational::from_integer(BigInt::from(k));
            for (&j, fj) in self.coeffs.range(1..=k) {
                let jq = Rational::from_integer(BigInt::from(j));
                let w = alpha * &jq - (&kq - &jq);
                if !w.is_zero() {
                    acc += w * fj * &h[k - j];
                }
            }
            h.push(acc / kq);
        }
        Ok(Self::from_dense(h, n))
    }

    /// The `n`-th root with constant coefficient 1 of a series whose
    /// constant coefficient is 1.
    pub fn nth_root_unit(&self, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("root of order 0".into()));
        }
        self.rational_power(&Rational::new(BigInt::one(), BigInt::from(n)))
    }

    /// Composition `f(g(t))` for `ord g >= 1`.
    pub fn substitute(&self, inner: &Self) -> Result<Self> {
        let v = match inner.order() {
            Some(0) => return Err(Error::OrderZeroInner),
            Some(v) => v,
            None => inner.precision.max(1),
        };
        let p = self.precision.saturating_mul(v).min(inner.precision);
        let Some(top) = self.degree() else {
            return Ok(Self::zero(p));
        };
        // Horner from the top coefficient down.
        let mut acc = Self::zero(p);
        for e in (0..=top).rev() {
            acc = acc.mul_truncated(inner, p);
            acc.precision = p;
            let c = self.coeff(e);
            if !c.is_zero() {
                let sum = acc.coeff(0) + c;
                acc.set(0, sum);
            }
        }
        Ok(acc)
    }

    pub fn as_map(&self) -> &BTreeMap<usize, Rational> {
        &self.coeffs
    }

    /// Builds a series from a coefficient map, dropping terms at or beyond
    /// the precision.
    pub fn from_map(mut coeffs: BTreeMap<usize, Rational>, precision: usize) -> Self {
        coeffs.retain(|&e, c| e < precision && !c.is_zero());
        Self { coeffs, precision }
    }

    fn from_dense(v: Vec<Rational>, precision: usize) -> Self {
        Self {
            coeffs: v
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .collect(),
            precision,
        }
    }

    /// Parses the literal syntax `c*t^e + ...` at the given precision.
    pub fn parse(text: &str, precision: usize) -> Result<Self> {
        let terms = parse_terms(text)?;
        Ok(Self::from_terms(terms, precision))
    }

    /// Writes the series as a literal (without the `O(t^N)` term).
    pub fn to_literal(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (&e, c)) in self.coeffs.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let var = match e {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{e}"),
            };
            if var.is_empty() {
                out.push_str(&a.to_string());
            } else if a.is_one() {
                out.push_str(&var);
            } else {
                out.push_str(&format!("{a}*{var}"));
            }
        }
        out
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O(t^{})", self.to_literal(), self.precision)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        let mut out = self.clone();
        out.add_scaled(&Rational::one(), rhs);
        out
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        let mut out = self.clone();
        out.add_scaled(&-Rational::one(), rhs);
        out
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.scale(&-Rational::one())
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        self.mul_series(rhs)
    }
}

/// Parses a rational literal such as `3`, `-2`, `3/2`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("bad rational `{text}`"));
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(text.parse().map_err(|_| bad())?)),
    }
}

fn parse_terms(text: &str) -> Result<Vec<(usize, Rational)>> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Parse("empty series literal".into()));
    }
    // Split into signed chunks.
    let mut chunks: Vec<(bool, String)> = Vec::new();
    let mut current = String::new();
    let mut negative = false;
    for ch in compact.chars() {
        if (ch == '+' || ch == '-') && !current.is_empty() && !current.ends_with('^') {
            chunks.push((negative, std::mem::take(&mut current)));
            negative = ch == '-';
        } else if (ch == '+' || ch == '-') && current.is_empty() {
            if ch == '-' {
                negative = !negative;
            }
        } else {
            current.push(ch);
        }
    }
    if current.is_empty() {
        return Err(Error::Parse(format!("dangling sign in `{text}`")));
    }
    chunks.push((negative, current));

    let mut out = Vec::with_capacity(chunks.len());
    for (neg, chunk) in chunks {
        let (coef, exp) = parse_term(&chunk)?;
        out.push((exp, if neg { -coef } else { coef }));
    }
    Ok(out)
}

fn parse_term(chunk: &str) -> Result<(Rational, usize)> {
    let bad = || Error::Parse(format!("bad term `{chunk}`"));
    let Some(tpos) = chunk.find('t') else {
        return Ok((parse_rational(chunk)?, 0));
    };
    let (coef_part, var_part) = chunk.split_at(tpos);
    let coef_part = coef_part.strip_suffix('*').unwrap_or(coef_part);
    let coef = if coef_part.is_empty() {
        Rational::one()
    } else {
        parse_rational(coef_part)?
    };
    let rest = &var_part[1..];
    let exp = if rest.is_empty() {
        1
    } else {
        let digits = rest.strip_prefix('^').ok_or_else(bad)?;
        digits.parse::<usize>().map_err(|_| bad())?
    };
    Ok((coef, exp))
}
