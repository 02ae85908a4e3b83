//! Random curves and the property checks shared by the property suites and
//! the acceptance run.

#![allow(dead_code)]

use curvediff::curve::CurveRing;
use curvediff::differentials::{model_precision, pair_with, torsion_for_relations};
use curvediff::implicitize::{relations_stable, relations_up_to_degree, required_precision};
use curvediff::poly::Poly;
use curvediff::report::transform_torsion;
use curvediff::transform::{build_transform, verify_transform_properties};
use curvediff::{Error, Rational, TruncatedSeries};
use num_integer::Integer;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const CASES: u32 = 100;

/// Generator spec: exponent and the tail coefficients of `t^a (1 + c1 t + c2 t^2 + c3 t^3)`.
pub type Spec = Vec<(usize, [i64; 3])>;

pub fn series(spec: &Spec, precision: usize) -> Vec<TruncatedSeries> {
    let mut gens: Vec<TruncatedSeries> = spec
        .iter()
        .map(|(a, tail)| {
            let mut terms = vec![(*a, 1)];
            terms.extend(tail.iter().enumerate().filter(|(_, &c)| c != 0).map(|(k, &c)| (a + k + 1, c)));
            TruncatedSeries::from_int_terms(&terms, precision)
        })
        .collect();
    gens.sort_by_key(|g| g.order());
    gens
}

/// Conductor of the numerical semigroup generated by `exps` (gcd 1).
pub fn semigroup_conductor(exps: &[usize]) -> usize {
    let a1 = *exps.iter().min().unwrap();
    let mut member = vec![true];
    let mut run = 0;
    let mut v = 0;
    while run < a1 {
        v += 1;
        let m = exps.iter().any(|&a| a <= v && member[v - a]);
        member.push(m);
        run = if m { run + 1 } else { 0 };
    }
    v + 1 - a1
}

/// Default conductor bound for the random curves; tails only enlarge the
/// value semigroup, so the leading exponents bound the conductor.
pub const MAX_CONDUCTOR: usize = 32;

/// Curves with `n` generators, distinct exponents in `lo..=hi` with gcd 1
/// and monomial conductor at most `max_c`, and unit tails of degree at
/// most 3 (zero tails when `tails` is false).
pub fn curve_spec(
    n: std::ops::RangeInclusive<usize>,
    lo: usize,
    hi: usize,
    max_c: usize,
    tails: bool,
) -> impl Strategy<Value = Spec> {
    let tail = if tails {
        prop::array::uniform3(prop_oneof![3 => Just(0i64), 1 => -2i64..=2]).boxed()
    } else {
        Just([0i64; 3]).boxed()
    };
    prop::collection::btree_set(lo..=hi, n)
        .prop_filter("exponents must have gcd 1", |s| s.iter().fold(0, |g, &a| g.gcd(&a)) == 1)
        .prop_filter("conductor bound", move |s| {
            semigroup_conductor(&s.iter().copied().collect::<Vec<_>>()) <= max_c
        })
        .prop_flat_map(move |exps| {
            let k = exps.len();
            (Just(exps), prop::collection::vec(tail.clone(), k))
        })
        .prop_map(|(exps, tails)| exps.into_iter().zip(tails).collect())
}

/// The ring of a spec, or `None` when a generator is redundant.
pub fn ring(spec: &Spec) -> Option<CurveRing> {
    match CurveRing::analyze(&series(spec, 64)) {
        Ok(r) => Some(r),
        Err(Error::RedundantGenerator { .. }) => None,
        Err(e) => panic!("analysis of {spec:?} failed: {e}"),
    }
}

pub fn describe(r: &CurveRing) -> String {
    let g: Vec<String> = r.generators().iter().map(|g| g.to_literal()).collect();
    format!("({})", g.join(", "))
}

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(what()))
    }
}

pub fn additive_closure(r: &CurveRing) -> Result<(), TestCaseError> {
    let p = r.profile();
    let bound = p.precision;
    let occ = p.occupied_below(bound);
    for &u in &occ {
        for &v in occ.iter().filter(|&&v| v >= u && u + v < bound) {
            check(p.is_occupied(u + v), || format!("{u} + {v} not occupied on {}", describe(r)))?;
        }
    }
    check(p.is_occupied(0), || "0 not occupied".into())?;
    check(
        (p.conductor..bound).all(|v| p.is_occupied(v)) && (p.conductor == 0 || !p.is_occupied(p.conductor - 1)),
        || format!("conductor {} inconsistent on {}", p.conductor, describe(r)),
    )
}

pub fn reduced_type_at_most_type(r: &CurveRing) -> Result<(), TestCaseError> {
    let s = r.reduced_type();
    let t = r.cm_type().map_err(|e| TestCaseError::fail(e.to_string()))?;
    check(s <= t, || format!("reduced type {s} > type {t} on {}", describe(r)))?;
    let by_ideals = r.reduced_type_by_ideals().map_err(|e| TestCaseError::fail(e.to_string()))?;
    check(by_ideals == s, || format!("reduced type {s} vs colength {by_ideals} on {}", describe(r)))
}

/// Transform checks for a ring with `𝔠 ⊆ m²`; rejects the case otherwise.
pub fn transform_properties(r: &CurveRing) -> Result<(), TestCaseError> {
    let Ok(true) = r.conductor_in_m_squared() else {
        return Err(TestCaseError::reject("conductor not in m^2"));
    };
    let tr = build_transform(r).map_err(|e| TestCaseError::fail(format!("{}: {e}", describe(r))))?;
    let props = verify_transform_properties(&tr);
    check(props.all_pass(), || format!("lemma clauses {props:?} on {}", describe(r)))?;
    check(tr.view.conductor() + r.multiplicity() == r.conductor(), || {
        format!("c_S = {} on {}", tr.view.conductor(), describe(r))
    })?;
    let (n, s) = (r.n(), tr.s());
    let type_r = r.cm_type().map_err(|e| TestCaseError::fail(e.to_string()))?;
    let type_s = tr.view.cm_type().map_err(|e| TestCaseError::fail(e.to_string()))?;
    check(type_s <= type_r + s * (n - 1), || {
        format!("type(S) = {type_s} > {type_r} + {s}*{} on {}", n - 1, describe(r))
    })?;
    for k in 2..=6 {
        let in_s = tr.view.power_containment(k).map_err(|e| TestCaseError::fail(e.to_string()))?.in_x1;
        let in_r = r.power_containment(k).map_err(|e| TestCaseError::fail(e.to_string()))?.in_x1_conductor;
        check(in_s == in_r, || {
            format!("k = {k}: m_S^k in x1 S is {in_s}, m_R^k in (x1, c) is {in_r} on {}", describe(r))
        })?;
    }
    Ok(())
}

/// `ℓ(τ)` and the last model order of the torsion run.
pub fn torsion_length(r: &CurveRing) -> Result<(usize, usize), String> {
    let rs = relations_stable(r, None).map_err(|e| e.to_string())?;
    let t = torsion_for_relations(r, &rs).map_err(|e| e.to_string())?;
    let order = t.history.last().map_or(0, |h| h.0);
    Ok((t.length(), order.max(required_precision(r, rs.degree_bound))))
}

/// Occupied values, conductor, reduced type and `ℓ(τ)` agree after
/// rewriting the curve so that `x_1` is monomial. The monomialized ring is
/// only known to a truncation, so it is built at the precision the exact
/// run's last model needed.
pub fn monomialization_invariance(r: &CurveRing) -> Result<(), TestCaseError> {
    let (before, order) = torsion_length(r).map_err(TestCaseError::fail)?;
    let precision = model_precision(r, order) + r.multiplicity();
    let big = r.at_precision(precision).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let m = big.monomialize(0).map_err(|e| TestCaseError::fail(format!("{}: {e}", describe(r))))?;
    check(m.is_monomial(0), || format!("x1 not monomial after rewriting {}", describe(r)))?;
    let bound = r.conductor() + r.exponents().iter().max().unwrap();
    check(m.profile().occupied_below(bound) == r.profile().occupied_below(bound), || {
        format!("occupied values changed on {}", describe(r))
    })?;
    check(m.conductor() == r.conductor(), || format!("conductor changed on {}", describe(r)))?;
    check(m.reduced_type() == r.reduced_type(), || format!("reduced type changed on {}", describe(r)))?;
    let (after, _) = torsion_length(&m).map_err(|e| TestCaseError::fail(format!("{}: {e}", describe(r))))?;
    check(before == after, || format!("torsion length {before} vs {after} on {}", describe(r)))
}

/// A random polynomial in the generators has a witness that evaluates back.
pub fn witness_round_trip(r: &CurveRing, coeffs: &[i64]) -> Result<(), TestCaseError> {
    let n = r.n();
    let monomials: Vec<Vec<u32>> = (1..=3).flat_map(|d| curvediff::poly::monomials_of_degree(n, d)).collect();
    let mut p = Poly::zero(n);
    for (m, &c) in monomials.iter().zip(coeffs.iter().cycle()) {
        p.add_term(m.clone(), Rational::from_integer(c.into()));
    }
    let mut ev = r.evaluator();
    let f = ev.eval(&p);
    let w = r.membership_with_witness(&f, false).map_err(|e| TestCaseError::fail(format!("{}: {e}", describe(r))))?;
    let back = ev.eval(&w);
    check(back.congruent(&f), || format!("witness {w} does not reproduce {p} on {}", describe(r)))?;
    let in_m2 = p.in_m_squared();
    if in_m2 {
        let w2 = r.membership_with_witness(&f, true).map_err(|e| TestCaseError::fail(e.to_string()))?;
        check(w2.in_m_squared() && ev.eval(&w2).congruent(&f), || format!("m^2 witness {w2} on {}", describe(r)))?;
    }
    Ok(())
}

/// Every relation vanishes on the curve and its gradient pairs to zero
/// with the derivatives of the generators.
pub fn chain_rule(r: &CurveRing, d: u32) -> Result<(), TestCaseError> {
    let rs = relations_up_to_degree(r, d).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let cur = r.at_precision(rs.precision).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let mut ev = cur.evaluator();
    let derivs = cur.derivatives();
    for f in &rs.relations {
        check(ev.eval(f).is_zero(), || format!("relation {f} does not vanish on {}", describe(r)))?;
        let grad: Vec<TruncatedSeries> = (0..cur.n()).map(|i| ev.eval(&f.partial(i))).collect();
        let pairing = pair_with(&grad, &derivs).truncate(rs.precision - 1);
        check(pairing.is_zero(), || format!("chain rule fails for {f} on {}", describe(r)))?;
    }
    Ok(())
}

/// Güttes bound on `S`, for rings with `𝔠 ⊆ m²` and `m_S^4 ⊆ x_1 S`.
/// Returns `None` when the curve does not qualify.
pub fn guttes(r: &CurveRing) -> Result<Option<(usize, usize)>, String> {
    if !r.conductor_in_m_squared().map_err(|e| e.to_string())? {
        return Ok(None);
    }
    let tr = build_transform(r).map_err(|e| e.to_string())?;
    if !tr.view.power_containment(4).map_err(|e| e.to_string())?.in_x1 {
        return Ok(None);
    }
    let rs = relations_stable(r, None).map_err(|e| e.to_string())?;
    let (t, _) = transform_torsion(r, &rs, &tr).map_err(|e| e.to_string())?;
    let e = r.n() + tr.s();
    Ok(Some((t.annihilator_x1_length(), (e - 2) * (e - 1) / 2)))
}

/// Runs `prop` on `cases` accepted curves from `strategy` with a fixed seed.
pub fn run_property<S, F>(strategy: S, cases: u32, prop: F) -> Result<(), String>
where
    S: Strategy<Value = Spec>,
    F: Fn(&CurveRing) -> Result<(), TestCaseError>,
{
    let config = Config {
        cases,
        max_global_rejects: 100_000,
        failure_persistence: None,
        rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, proptest::test_runner::TestRng::deterministic_rng(
        proptest::test_runner::RngAlgorithm::ChaCha,
    ));
    runner
        .run(&strategy, |spec| match ring(&spec) {
            Some(r) => prop(&r),
            None => Err(TestCaseError::reject("redundant generator")),
        })
        .map_err(|e| e.to_string())
}

pub fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Rank by dense Gaussian elimination.
pub fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = &row[c] * &inv;
                for (x, y) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *x -= &f * y;
                }
            }
        }
        r += 1;
    }
    r
}

/// `ℓ(τ)` of the cusp `(t^2, t^3)` in the truncation model of order `m`:
/// pairs `(a, b)` of ring elements mod `t^m` with `2t a + 3t^2 b ≡ 0` mod
/// `t^(m+1)`, modulo the span of `e (-3t^4, 2t^3)`.
pub fn cusp_length(m: usize) -> (usize, Vec<Vec<Rational>>, Vec<Vec<Rational>>) {
    let basis: Vec<usize> = (0..m).filter(|&k| k != 1).collect();
    let dim = 2 * m;
    // Kernel of (a, b) -> 2t a + 3t^2 b below t^(m+1), over coordinates (a_k, b_k).
    let mut eqs = vec![vec![q(0); 2 * basis.len()]; m + 1];
    for (j, &k) in basis.iter().enumerate() {
        if k < m {
            eqs[k + 1][j] += q(2);
        }
        if k + 2 <= m {
            eqs[k + 2][basis.len() + j] += q(3);
        }
    }
    let unknowns = 2 * basis.len();
    let k_dim = unknowns - rank(eqs);
    let mut j_rows = Vec::new();
    for &e in &basis {
        let mut v = vec![q(0); dim];
        if e + 4 < m {
            v[e + 4] = q(-3);
        }
        if e + 3 < m {
            v[m + e + 3] = q(2);
        }
        j_rows.push(v);
    }
    let j_dim = rank(j_rows.clone());
    // The syzygy 2x dy - 3y dx = (-3t^3, 2t^2).
    let mut w = vec![q(0); dim];
    w[3] = q(-3);
    w[m + 2] = q(2);
    (k_dim - j_dim, j_rows, vec![w])
}

/// Membership table of the numerical semigroup generated by `exps`, up to `bound`.
pub fn semigroup(exps: &[usize], bound: usize) -> Vec<bool> {
    let mut member = vec![false; bound];
    member[0] = true;
    for v in 1..bound {
        member[v] = exps.iter().any(|&a| a <= v && member[v - a]);
    }
    member
}

/// Minimal binomial generators of the toric ideal of `⟨exps⟩`: for each
/// `v`, the graph on `{i : v - a_i ∈ Γ}` with an edge when
/// `v - a_i - a_j ∈ Γ` contributes (components - 1).
pub fn toric_mu(exps: &[usize]) -> usize {
    let bound = 4 * (semigroup_conductor(exps) + exps.iter().sum::<usize>());
    let member = semigroup(exps, bound);
    let mut mu = 0;
    for v in 1..bound {
        if !member[v] {
            continue;
        }
        let verts: Vec<usize> = (0..exps.len()).filter(|&i| exps[i] <= v && member[v - exps[i]]).collect();
        let mut parent: Vec<usize> = (0..exps.len()).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for (k, &i) in verts.iter().enumerate() {
            for &j in &verts[k + 1..] {
                if exps[i] + exps[j] <= v && member[v - exps[i] - exps[j]] {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        let roots: std::collections::BTreeSet<usize> = verts.iter().map(|&i| find(&mut parent, i)).collect();
        mu += roots.len().saturating_sub(1);
    }
    mu
}
