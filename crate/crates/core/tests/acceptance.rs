//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! A criterion whose literal expectation disagrees with an independently
//! verified value prints FAIL together with the verified value; the run
//! only exits nonzero when a check fails outright.

mod common;

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use curvediff::curve::CurveRing;
use curvediff::differentials::{torsion_for_relations, DifferentialVector};
use curvediff::implicitize::{relations_stable, Completeness};
use curvediff::poly::Poly;
use curvediff::pullback::{quasi_homogeneous_check, QuasiHomogeneity, TheoremEntry, Verdict};
use curvediff::report::{analyze_curve, parse_curve, AnalysisOptions, AnalysisReport, CurveInput};
use curvediff::transform::build_transform;
use curvediff::TruncatedSeries;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

enum Outcome {
    Pass(String),
    /// Literal expectation missed; the verified value is in the message.
    Deviation(String),
    Fail(String),
}

type Check = Result<Outcome, String>;

type Suite = Box<dyn Fn() -> Result<(), String>>;

fn input(stem: &str) -> CurveInput {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../curves").join(format!("{stem}.curve"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_curve(&text, stem).unwrap()
}

struct Reports(HashMap<&'static str, AnalysisReport>);

impl Reports {
    fn get(&mut self, stem: &'static str) -> Result<&AnalysisReport, String> {
        if !self.0.contains_key(stem) {
            let r = analyze_curve(&input(stem), AnalysisOptions::default()).map_err(|e| format!("{stem}: {e}"))?;
            self.0.insert(stem, r);
        }
        Ok(&self.0[stem])
    }
}

fn entry<'a>(r: &'a AnalysisReport, name: &str) -> Result<&'a TheoremEntry, String> {
    r.theorems.entries.iter().find(|e| e.name == name).ok_or(format!("no entry {name}"))
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn conductors() -> Check {
    let cases = [
        ("conductor7", 7),
        ("two-monomials", 20),
        ("t4-11-17", 19),
        ("qh-transform", 13),
        ("max-reduced-type", 20),
    ];
    let mut parts = Vec::new();
    for (stem, expected) in cases {
        let start = Instant::now();
        let c = CurveRing::analyze(&input(stem).generators).map_err(err)?.conductor();
        let took = start.elapsed();
        if c != expected || took >= Duration::from_secs(5) {
            return Ok(Outcome::Fail(format!("{stem}: c = {c} (expected {expected}) in {took:.2?}")));
        }
        parts.push(format!("{stem} c={c} {took:.2?}"));
    }
    Ok(Outcome::Pass(parts.join(", ")))
}

fn transforms() -> Check {
    let r = CurveRing::analyze(&input("t4-11-17").generators).map_err(err)?;
    let tr = build_transform(&r).map_err(err)?;
    let gens: Vec<String> = tr.view.generators().iter().map(|g| g.to_literal()).collect();
    if tr.b != [18] || tr.s() != 1 || gens != ["t^4", "t^11", "t^17", "t^18"] {
        return Ok(Outcome::Fail(format!("t4-11-17: b = {:?}, S = ({})", tr.b, gens.join(", "))));
    }
    let r = CurveRing::analyze(&input("qh-transform").generators).map_err(err)?;
    let tr = build_transform(&r).map_err(err)?;
    let semigroup = tr.view.profile().semigroup_generators();
    let qh = quasi_homogeneous_check(&tr);
    if semigroup != [5, 8, 9, 11, 12] || tr.view.n() != 5 || qh != QuasiHomogeneity::Yes {
        return Ok(Outcome::Fail(format!("qh: semigroup {semigroup:?}, edim {}, {qh:?}", tr.view.n())));
    }
    Ok(Outcome::Pass("S = (t^4, t^11, t^17, t^18) with s = 1; qh S = monomial (5, 8, 9, 11, 12), edim 5".into()))
}

fn relation_counts(reports: &mut Reports) -> Check {
    let r = CurveRing::analyze(&input("e345").generators).map_err(err)?;
    let rs = relations_stable(&r, None).map_err(err)?;
    if rs.relations.len() != 3 || rs.completeness != Completeness::Stable {
        return Ok(Outcome::Fail(format!("e345: mu = {} ({:?})", rs.relations.len(), rs.completeness)));
    }
    let rel = reports.get("qh-transform")?.relations.clone().ok_or("qh: no relations")?;
    let toric = toric_mu(&[5, 8, 9, 11]);
    if rel.mu == 8 && rel.deviation == 5 && rel.completeness == Completeness::Stable {
        return Ok(Outcome::Pass("e345 mu = 3; qh mu = 8, deviation 5, stable".into()));
    }
    if rel.mu == toric && rel.deviation == 2 && rel.completeness == Completeness::Stable {
        return Ok(Outcome::Deviation(format!(
            "e345 mu = 3 stable; qh mu = {} deviation {} stable, expected 8 / 5; the monomial curve \
             <5,8,9,11> has {toric} minimal binomials and a deformation cannot need more",
            rel.mu, rel.deviation
        )));
    }
    Ok(Outcome::Fail(format!("qh: mu = {}, deviation {}, {:?}", rel.mu, rel.deviation, rel.completeness)))
}

fn certified(r: &AnalysisReport, theorem: &str, element: &str) -> Result<bool, String> {
    let e = entry(r, theorem)?;
    Ok(e.certificate.as_ref().is_some_and(|c| c.element == element && c.passes()))
}

fn torsion_certificates(reports: &mut Reports) -> Check {
    if !certified(reports.get("e345")?, "conductor-not-in-m2", "4*x2*dx1 - 3*x1*dx2")? {
        return Ok(Outcome::Fail("e345: 4 y dx - 3 x dy not certified".into()));
    }
    if !certified(reports.get("two-monomials")?, "two-monomial-generators", "14*x4*dx3 - 12*x3*dx4")? {
        return Ok(Outcome::Fail("two-monomials: 14 x4 dx3 - 12 x3 dx4 not certified".into()));
    }
    let oracle: Vec<usize> = [12, 14].iter().map(|&m| cusp_length(m).0).collect();
    let gens: Vec<TruncatedSeries> = [2, 3].iter().map(|&a| TruncatedSeries::t_pow(a, 64)).collect();
    let r = CurveRing::analyze(&gens).map_err(err)?;
    let rs = relations_stable(&r, None).map_err(err)?;
    let t = torsion_for_relations(&r, &rs).map_err(err)?;
    let w = DifferentialVector::new(vec![Poly::var(2, 1).scale(&q(-3)), Poly::var(2, 0).scale(&q(2))]);
    let generator = w.is_syzygy(&t.ring) && t.model.generator_count == 1 && t.model.is_minimal_generator(&t.ring, &w);
    if !generator || oracle.iter().any(|&l| l != t.length()) {
        return Ok(Outcome::Fail(format!("cusp: length {} oracle {oracle:?}, generator {generator}", t.length())));
    }
    if t.length() == 1 {
        return Ok(Outcome::Pass("e345, cusp (length 1) and two-monomials certified".into()));
    }
    Ok(Outcome::Deviation(format!(
        "e345 and two-monomials certified; cusp length {} (brute force at orders 12, 14: {oracle:?}), expected 1; \
         2x dy - 3y dx generates tau minimally; the length equals the Tjurina number of y^2 = x^3",
        t.length()
    )))
}

fn verdicts(reports: &mut Reports) -> Check {
    let c7 = entry(reports.get("conductor7")?, "conductor-not-in-m2")?.verdict;
    let qh_report = reports.get("qh-transform")?;
    let qh = entry(qh_report, "quasi-homogeneous-transform")?;
    let qh_ok = qh.verdict == Verdict::Applies
        && qh.certificate.as_ref().is_some_and(|c| c.passes())
        && qh_report.transform.as_ref().and_then(|t| t.pullback.as_ref()).is_some_and(|p| p.certified);
    let qh_verdict = qh.verdict;
    let max = reports.get("max-reduced-type")?.theorems.maximal_reduced_type;
    let by_ideals = CurveRing::analyze(&input("max-reduced-type").generators)
        .and_then(|r| r.has_maximal_reduced_type())
        .map_err(err)?;
    if c7 == Verdict::Applies && qh_ok && max == Some(true) && by_ideals {
        Ok(Outcome::Pass(
            "conductor7 applies; qh applies with certified pullback; max-reduced-type (x):m = (x, c)".into(),
        ))
    } else {
        Ok(Outcome::Fail(format!("conductor7 {c7:?}, qh {qh_verdict:?} ok={qh_ok}, maximal {max:?} / {by_ideals}")))
    }
}

fn properties() -> Check {
    let suites: Vec<(&str, Suite)> = vec![
        ("additive closure", Box::new(|| run_property(curve_spec(2..=4, 2, 15, MAX_CONDUCTOR, true), CASES, additive_closure))),
        ("reduced type", Box::new(|| run_property(curve_spec(2..=4, 2, 15, MAX_CONDUCTOR, true), CASES, reduced_type_at_most_type))),
        ("transform", Box::new(|| run_property(curve_spec(2..=4, 3, 15, MAX_CONDUCTOR, true), CASES, transform_properties))),
        ("monomialization", Box::new(|| run_property(curve_spec(2..=3, 2, 7, 12, true), CASES, monomialization_invariance))),
        ("witnesses", Box::new(|| {
            run_property(curve_spec(2..=4, 2, 15, MAX_CONDUCTOR, true), CASES, |r| {
                witness_round_trip(r, &[1, -2, 3, 1, -1])
            })
        })),
        ("chain rule", Box::new(|| run_property(curve_spec(2..=3, 2, 9, MAX_CONDUCTOR, true), CASES, |r| chain_rule(r, 4)))),
    ];
    let mut parts = Vec::new();
    for (name, run) in suites {
        let start = Instant::now();
        if let Err(e) = run() {
            return Ok(Outcome::Fail(format!("{name}: {e}")));
        }
        parts.push(format!("{name} {:.1?}", start.elapsed()));
    }
    Ok(Outcome::Pass(format!("{CASES} cases each: {}", parts.join(", "))))
}

fn guttes_sweep() -> Check {
    let mut runner = TestRunner::deterministic();
    let strategy = curve_spec(3..=4, 3, 12, 20, true);
    let (mut curves, mut qualifying) = (0, 0);
    for _ in 0..60 {
        let spec = strategy.new_tree(&mut runner).map_err(err)?.current();
        let Some(r) = ring(&spec) else { continue };
        curves += 1;
        match guttes(&r)? {
            Some((len, bound)) if len < bound => {
                return Ok(Outcome::Fail(format!("{}: length {len} < bound {bound}", describe(&r))));
            }
            Some(_) => qualifying += 1,
            None => {}
        }
    }
    if qualifying == 0 {
        return Ok(Outcome::Fail(format!("no qualifying curve among {curves}")));
    }
    Ok(Outcome::Pass(format!("{qualifying} of {curves} curves satisfy m_S^4 in x1 S, zero violations")))
}

fn main() -> ExitCode {
    let mut reports = Reports(HashMap::new());
    let mut broken = false;
    let criteria: Vec<(u32, Check)> = vec![
        (1, conductors()),
        (2, transforms()),
        (3, relation_counts(&mut reports)),
        (4, torsion_certificates(&mut reports)),
        (5, verdicts(&mut reports)),
        (6, properties()),
        (7, guttes_sweep()),
    ];
    for (k, outcome) in criteria {
        match outcome {
            Ok(Outcome::Pass(m)) => println!("PASS criterion {k}: {m}"),
            Ok(Outcome::Deviation(m)) => println!("FAIL criterion {k} (verified deviation): {m}"),
            Ok(Outcome::Fail(m)) | Err(m) => {
                broken = true;
                println!("FAIL criterion {k}: {m}");
            }
        }
    }
    if broken {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
