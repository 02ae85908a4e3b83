//! Curve input files, the end-to-end analysis pipeline and its report.
//!
//! A curve file holds one generator per line in series literal syntax, with
//! optional `name = <text>` and `precision = <int>` lines and `#` comments.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::curve::{CurveRing, PowerContainment, PRECISION_HARD_CAP};
use crate::differentials::{
    certify_nonzero_mod_m2, monomial_pair_torsion, presentation_from_relations, torsion_for_relations,
    torsion_submodule, TorsionResult, VectorTag,
};
use crate::error::{Error, Result};
use crate::implicitize::{relations_at_precision, relations_stable, relations_up_to_degree, required_precision, Completeness, RelationSet};
use crate::pullback::{
    gamma_elements, pullback_to_r, quasi_homogeneous_check, theorem_checklist_with, ChecklistContext,
    QuasiHomogeneity, TheoremReport,
};
use crate::series::TruncatedSeries;
use crate::transform::{build_transform, verify_transform_properties, TransformProperties, TransformRing};

/// Version of the record schema written by [`AnalysisReport::to_records`].
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct CurveInput {
    pub name: String,
    pub generators: Vec<TruncatedSeries>,
    pub precision: Option<usize>,
}

/// Parses a curve file. Generators are sorted by order (stably).
pub fn parse_curve(text: &str, default_name: &str) -> Result<CurveInput> {
    let mut name = default_name.to_string();
    let mut precision = None;
    let mut generators = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            let value = value.trim();
            match key.trim() {
                "name" => name = value.to_string(),
                "precision" => {
                    precision = Some(value.parse::<usize>().map_err(|_| {
                        Error::Parse(format!("line {}: bad precision {value:?}", lineno + 1))
                    })?)
                }
                other => return Err(Error::Parse(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
            continue;
        }
        let g = TruncatedSeries::parse(line, PRECISION_HARD_CAP)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        generators.push(g);
    }
    if generators.is_empty() {
        return Err(Error::Parse("no generators".into()));
    }
    generators.sort_by_key(|g| g.order().unwrap_or(0));
    Ok(CurveInput {
        name,
        generators,
        precision,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub precision: Option<usize>,
    pub degree_bound: Option<u32>,
    pub skip_implicitize: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileSection {
    pub n: usize,
    pub exponents: Vec<usize>,
    pub conductor: usize,
    pub gaps: Vec<usize>,
    pub semigroup_generators: Vec<usize>,
    pub reduced_type: usize,
    pub reduced_type_exponents: Vec<usize>,
    pub cm_type: usize,
    pub gorenstein: bool,
    pub conductor_in_m2: bool,
    pub containment: Vec<PowerContainment>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationSection {
    pub degree_bound: u32,
    pub completeness: Completeness,
    pub counts: Vec<usize>,
    pub mu: usize,
    pub deviation: isize,
    pub relations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElementEntry {
    pub element: String,
    pub nonzero_mod_m2: bool,
    pub nonzero_in_model: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionSection {
    pub length: usize,
    pub annihilator_x1_length: usize,
    pub generator_count: usize,
    pub basis: Vec<ElementEntry>,
    pub monomial_pairs: Vec<ElementEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PullbackSection {
    /// `ns + C(s,2) + 1`.
    pub threshold: usize,
    pub usable: usize,
    pub conditions: usize,
    pub kernel_dim: usize,
    pub element: Option<String>,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransformSection {
    pub b: Vec<usize>,
    pub s: usize,
    pub generators: Vec<String>,
    pub conductor: usize,
    pub properties: TransformProperties,
    pub witnesses: Vec<String>,
    pub gammas: Vec<String>,
    pub quasi_homogeneous: QuasiHomogeneity,
    pub torsion_length: Option<usize>,
    pub annihilator_x1_length: Option<usize>,
    pub pullback: Option<PullbackSection>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditTrail {
    pub precision_override: Option<usize>,
    pub precision_history: Vec<usize>,
    pub precision: usize,
    pub degree_bound: Option<u32>,
    pub relation_precision: Option<usize>,
    pub monomial_order: &'static str,
    /// `(M, ℓ)` pairs of the torsion model of `R`.
    pub torsion_orders: Vec<(usize, usize)>,
    pub transform_torsion_orders: Vec<(usize, usize)>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub name: String,
    pub generators: Vec<String>,
    pub profile: ProfileSection,
    pub relations: Option<RelationSection>,
    pub torsion: Option<TorsionSection>,
    pub transform: Option<TransformSection>,
    pub theorems: TheoremReport,
    pub audit: AuditTrail,
}

/// Runs the whole pipeline on one curve.
pub fn analyze_curve(input: &CurveInput, opts: AnalysisOptions) -> Result<AnalysisReport> {
    let override_n = opts.precision.or(input.precision);
    let r = match override_n {
        Some(n) => CurveRing::analyze_at(&input.generators, n)?,
        None => CurveRing::analyze(&input.generators)?,
    };
    let mut notes = Vec::new();

    let containment = (2..=6).map(|k| r.power_containment(k)).collect::<Result<Vec<_>>>()?;
    let cm_type = r.cm_type()?;
    let c_in_m2 = r.conductor_in_m_squared()?;
    let profile = ProfileSection {
        n: r.n(),
        exponents: r.exponents().to_vec(),
        conductor: r.conductor(),
        gaps: r.profile().gaps.clone(),
        semigroup_generators: r.profile().semigroup_generators(),
        reduced_type: r.reduced_type(),
        reduced_type_exponents: r.profile().reduced_type_exponents.clone(),
        cm_type,
        gorenstein: cm_type == 1,
        conductor_in_m2: c_in_m2,
        containment,
    };

    let rs: Option<RelationSet> = if opts.skip_implicitize {
        notes.push("implicitization skipped; only valuation-based checks ran".into());
        None
    } else {
        Some(match opts.degree_bound {
            Some(d) => relations_up_to_degree(&r, d)?,
            None => relations_stable(&r, None)?,
        })
    };
    let relations = rs.as_ref().map(|rs| {
        let gc = rs.minimal_generator_count();
        RelationSection {
            degree_bound: rs.degree_bound,
            completeness: rs.completeness,
            counts: rs.counts.clone(),
            mu: gc.mu,
            deviation: gc.deviation,
            relations: rs.relations.iter().map(|f| f.to_string()).collect(),
        }
    });

    let tor: Option<TorsionResult> = match &rs {
        Some(rs) => Some(torsion_for_relations(&r, rs)?),
        None => None,
    };
    let torsion = tor.as_ref().map(|t| torsion_section(&r, t));

    let mut transform = None;
    let mut tr_used: Option<TransformRing> = None;
    let mut pb_used = None;
    let mut s_orders = Vec::new();
    if c_in_m2 {
        let tr = build_transform(&r)?;
        let properties = verify_transform_properties(&tr);
        let names = tr.names();
        let s_rel = tr.relations(rs.as_ref().map(|x| x.relations.as_slice()).unwrap_or(&[]));
        let gammas = gamma_elements(&tr, &s_rel)?;
        let mut witnesses = Vec::new();
        for j in 0..tr.s() {
            for i in 0..tr.n() {
                witnesses.push(format!("x{}*T{} = {}", i + 1, j + 1, tr.g[i][j].display_with(&names)));
            }
        }
        for k in 0..tr.s() {
            for l in k..tr.s() {
                witnesses.push(format!("T{}*T{} = {}", k + 1, l + 1, tr.h(k, l).display_with(&names)));
            }
        }
        let qh = quasi_homogeneous_check(&tr);
        let mut section = TransformSection {
            b: tr.b.clone(),
            s: tr.s(),
            generators: tr.view.generators().iter().map(|g| g.to_literal()).collect(),
            conductor: tr.view.conductor(),
            properties,
            witnesses,
            gammas: gammas.iter().map(|g| g.display_with(&names)).collect(),
            quasi_homogeneous: qh,
            torsion_length: None,
            annihilator_x1_length: None,
            pullback: None,
        };
        let mut final_tr = tr.clone();
        if let (Some(rs), Some(rt)) = (&rs, &tor) {
            let (st, ptr) = transform_torsion(&r, rs, &tr)?;
            s_orders = st.history.clone();
            section.torsion_length = Some(st.length());
            section.annihilator_x1_length = Some(st.annihilator_x1_length());
            let pb = pullback_to_r(st.basis(), &ptr, Some((&rt.ring, &rt.model)))?;
            let s = tr.s();
            section.pullback = Some(PullbackSection {
                threshold: tr.n() * s + s * (s.saturating_sub(1)) / 2 + 1,
                usable: pb.usable,
                conditions: pb.conditions,
                kernel_dim: pb.kernel_dim,
                element: pb.element.as_ref().map(|v| v.to_string()),
                certified: pb.certified(),
            });
            if st.length() < section.pullback.as_ref().unwrap().threshold {
                notes.push(format!(
                    "torsion length of S is {}, below the count ns + C(s,2) + 1 = {}",
                    st.length(),
                    section.pullback.as_ref().unwrap().threshold
                ));
            }
            final_tr = ptr;
            pb_used = Some(pb);
        }
        transform = Some(section);
        tr_used = Some(final_tr);
    }

    let theorems = theorem_checklist_with(
        &r,
        ChecklistContext {
            transform: tr_used.as_ref(),
            pullback: pb_used.as_ref(),
        },
    )?;
    if !theorems.nonzero_torsion_certified {
        notes.push("no certificate found".into());
    }

    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        name: input.name.clone(),
        generators: r.generators().iter().map(|g| g.to_literal()).collect(),
        profile,
        relations,
        torsion,
        transform,
        theorems,
        audit: AuditTrail {
            precision_override: override_n,
            precision_history: r.precision_history().to_vec(),
            precision: r.precision(),
            degree_bound: rs.as_ref().map(|x| x.degree_bound),
            relation_precision: rs.as_ref().map(|x| x.precision),
            monomial_order: "grlex",
            torsion_orders: tor.as_ref().map(|t| t.history.clone()).unwrap_or_default(),
            transform_torsion_orders: s_orders,
            notes,
        },
    })
}

fn torsion_section(r: &CurveRing, t: &TorsionResult) -> TorsionSection {
    let entry = |v: &crate::differentials::DifferentialVector| ElementEntry {
        element: v.to_string(),
        nonzero_mod_m2: v.tag == VectorTag::CertifiedNonzero || certify_nonzero_mod_m2(v, &[]),
        nonzero_in_model: t.model.is_syzygy(&t.ring, v) && !t.model.is_zero_in_omega(&t.ring, v),
    };
    let mut pairs = Vec::new();
    let monos: Vec<usize> = (0..r.n()).filter(|&i| r.is_monomial(i)).collect();
    for (k, &i) in monos.iter().enumerate() {
        for &j in &monos[k + 1..] {
            if let Ok(v) = monomial_pair_torsion(r, i, j, &[]) {
                pairs.push(entry(&v));
            }
        }
    }
    TorsionSection {
        length: t.length(),
        annihilator_x1_length: t.annihilator_x1_length(),
        generator_count: t.model.generator_count,
        basis: t.basis().iter().map(entry).collect(),
        monomial_pairs: pairs,
    }
}

/// Torsion of `S`, re-deriving `R`, its relations and the transform at
/// each precision the model asks for. Returns the transform the final
/// model was built on.
pub fn transform_torsion(r: &CurveRing, rs: &RelationSet, tr: &TransformRing) -> Result<(TorsionResult, TransformRing)> {
    let last: RefCell<Option<TransformRing>> = RefCell::new(None);
    let res = torsion_submodule(&tr.view, |need| {
        let p = need.max(required_precision(r, rs.degree_bound)).max(r.precision());
        let (rp, rels) = if p <= rs.precision && p <= r.precision() {
            (r.clone(), rs.relations.clone())
        } else {
            let rp = r.at_precision(p)?;
            let rels = relations_at_precision(&rp, rs)?.relations;
            (rp, rels)
        };
        let trp = build_transform(&rp)?;
        let srel = trp.relations(&rels);
        let jp = presentation_from_relations(&srel, &trp.view, rp.precision())?;
        let view = trp.view.clone();
        *last.borrow_mut() = Some(trp);
        Ok((view, jp))
    })?;
    let trp = last.into_inner().expect("provider ran");
    Ok((res, trp))
}

impl AnalysisReport {
    /// Values compared by golden files, keyed by stable names.
    pub fn facts(&self) -> BTreeMap<String, String> {
        let mut f = BTreeMap::new();
        let p = &self.profile;
        f.insert("conductor".into(), p.conductor.to_string());
        f.insert("n".into(), p.n.to_string());
        f.insert("exponents".into(), join(&p.exponents));
        f.insert("reduced_type".into(), p.reduced_type.to_string());
        f.insert("type".into(), p.cm_type.to_string());
        f.insert("conductor_in_m2".into(), p.conductor_in_m2.to_string());
        if let Some(rel) = &self.relations {
            f.insert("mu".into(), rel.mu.to_string());
            f.insert("deviation".into(), rel.deviation.to_string());
            f.insert("completeness".into(), kebab(&rel.completeness));
        }
        if let Some(t) = &self.torsion {
            f.insert("torsion_length".into(), t.length.to_string());
            f.insert("torsion_generators".into(), t.generator_count.to_string());
        }
        if let Some(t) = &self.transform {
            f.insert("transform".into(), t.generators.join(", "));
            f.insert("s".into(), t.b.len().to_string());
            f.insert("b".into(), join(&t.b));
            f.insert("conductor_s".into(), t.conductor.to_string());
            f.insert("transform_properties".into(), t.properties.all_pass().to_string());
            f.insert("quasi_homogeneous".into(), kebab(&t.quasi_homogeneous));
            if let Some(pb) = &t.pullback {
                f.insert("pullback_certified".into(), pb.certified.to_string());
            }
        }
        for e in &self.theorems.entries {
            f.insert(format!("verdict.{}", e.name), kebab(&e.verdict));
            if let Some(c) = &e.certificate {
                f.insert(format!("certificate.{}", e.name), c.element.clone());
            }
        }
        if let Some(m) = self.theorems.maximal_reduced_type {
            f.insert("maximal_reduced_type".into(), m.to_string());
        }
        f.insert(
            "nonzero_torsion_certified".into(),
            self.theorems.nonzero_torsion_certified.to_string(),
        );
        f
    }

    /// Line-delimited JSON records, each carrying `schema_version` and
    /// `record`.
    pub fn to_records(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut push = |kind: &str, body: serde_json::Value| {
            let mut obj = serde_json::Map::new();
            obj.insert("schema_version".into(), SCHEMA_VERSION.into());
            obj.insert("record".into(), kind.into());
            obj.insert("curve".into(), self.name.clone().into());
            if let serde_json::Value::Object(m) = body {
                obj.extend(m);
            }
            out.push(serde_json::Value::Object(obj).to_string());
        };
        push(
            "curve",
            serde_json::json!({ "generators": self.generators }),
        );
        push("profile", json(&self.profile));
        if let Some(r) = &self.relations {
            push("relations", json(r));
        }
        if let Some(t) = &self.torsion {
            push("torsion", json(t));
        }
        if let Some(t) = &self.transform {
            push("transform", json(t));
        }
        for e in &self.theorems.entries {
            push("theorem", json(e));
        }
        push(
            "summary",
            serde_json::json!({
                "maximal_reduced_type": self.theorems.maximal_reduced_type,
                "nonzero_torsion_certified": self.theorems.nonzero_torsion_certified,
            }),
        );
        push("audit", json(&self.audit));
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.profile;
        let _ = writeln!(s, "curve {}", self.name);
        let _ = writeln!(s, "  generators: {}", self.generators.join(", "));
        let _ = writeln!(s, "value profile");
        let _ = writeln!(s, "  n = {}, exponents = [{}]", p.n, join(&p.exponents));
        let _ = writeln!(s, "  conductor c = {}", p.conductor);
        let _ = writeln!(s, "  gaps = [{}]", join(&p.gaps));
        let _ = writeln!(s, "  semigroup generators = [{}]", join(&p.semigroup_generators));
        let _ = writeln!(
            s,
            "  reduced type s = {} (b = [{}]), type = {}{}",
            p.reduced_type,
            join(&p.reduced_type_exponents),
            p.cm_type,
            if p.gorenstein { " (Gorenstein)" } else { "" }
        );
        let _ = writeln!(s, "  conductor in m^2: {}", p.conductor_in_m2);
        for pc in &p.containment {
            let _ = writeln!(
                s,
                "  m^{} in (x1): {}, in (x1, c): {}",
                pc.k, pc.in_x1, pc.in_x1_conductor
            );
        }
        if let Some(r) = &self.relations {
            let _ = writeln!(s, "relations (degree <= {}, {})", r.degree_bound, kebab(&r.completeness));
            let _ = writeln!(s, "  mu(I) = {}, deviation = {}", r.mu, r.deviation);
            let _ = writeln!(s, "  counts by degree = [{}]", join(&r.counts));
            for f in &r.relations {
                let _ = writeln!(s, "  {f}");
            }
        }
        if let Some(t) = &self.torsion {
            let _ = writeln!(s, "torsion of Omega_R");
            let _ = writeln!(
                s,
                "  length = {}, length of (0 : x1) = {}, minimal generators = {}",
                t.length, t.annihilator_x1_length, t.generator_count
            );
            for e in &t.basis {
                let _ = writeln!(s, "  basis {}{}", e.element, cert_tags(e));
            }
            for e in &t.monomial_pairs {
                let _ = writeln!(s, "  monomial pair {}{}", e.element, cert_tags(e));
            }
        }
        if let Some(t) = &self.transform {
            let _ = writeln!(s, "transform S");
            let _ = writeln!(s, "  b = [{}], s = {}, c_S = {}", join(&t.b), t.s, t.conductor);
            let _ = writeln!(s, "  generators: {}", t.generators.join(", "));
            let pr = &t.properties;
            for (label, ok) in [
                ("c/x1 integral", pr.quotient_integral),
                ("m (c/x1) in c", pr.maximal_ideal_times_quotient),
                ("(c/x1)^2 in c", pr.quotient_squared),
                ("c_S = c_R - a1", pr.conductor_drop),
                ("dim S/R = s", pr.colength),
                ("edim S = n + s", pr.embedding_dimension),
            ] {
                let _ = writeln!(s, "  {label}: {}", if ok { "pass" } else { "FAIL" });
            }
            for w in &t.witnesses {
                let _ = writeln!(s, "  {w}");
            }
            for g in &t.gammas {
                let _ = writeln!(s, "  gamma {g}");
            }
            let _ = writeln!(s, "  quasi-homogeneous: {}", kebab(&t.quasi_homogeneous));
            if let (Some(l), Some(a)) = (t.torsion_length, t.annihilator_x1_length) {
                let _ = writeln!(s, "  torsion length of S = {l}, length of (0 : x1) = {a}");
            }
            if let Some(pb) = &t.pullback {
                let _ = writeln!(
                    s,
                    "  pullback: threshold {}, usable {}, conditions {}, kernel {}",
                    pb.threshold, pb.usable, pb.conditions, pb.kernel_dim
                );
                match &pb.element {
                    Some(e) => {
                        let _ = writeln!(s, "  pulled back {e} ({})", if pb.certified { "certified" } else { "uncertified" });
                    }
                    None => {
                        let _ = writeln!(s, "  pulled back: insufficient");
                    }
                }
            }
        }
        let _ = writeln!(s, "theorems");
        for e in &self.theorems.entries {
            let _ = writeln!(s, "  {}: {}", e.name, kebab(&e.verdict));
            for h in &e.hypotheses {
                let v = match h.holds {
                    Some(true) => "yes",
                    Some(false) => "no",
                    None => "unknown",
                };
                let _ = writeln!(s, "    {}: {v} ({})", h.name, h.detail);
            }
            if let Some(c) = &e.certificate {
                let _ = writeln!(
                    s,
                    "    certificate {} on ({}) [syzygy {}, nonzero mod m^2 {}]",
                    c.element,
                    c.generators.join(", "),
                    c.syzygy,
                    c.nonzero_mod_m2
                );
            }
        }
        if let Some(m) = self.theorems.maximal_reduced_type {
            let _ = writeln!(s, "  maximal reduced type: {m}");
        }
        let _ = writeln!(
            s,
            "nonzero torsion certified: {}",
            if self.theorems.nonzero_torsion_certified { "yes" } else { "no" }
        );
        let a = &self.audit;
        let _ = writeln!(s, "audit");
        let _ = writeln!(
            s,
            "  precision N = {} (tried [{}]{})",
            a.precision,
            join(&a.precision_history),
            a.precision_override.map(|n| format!(", override {n}")).unwrap_or_default()
        );
        if let Some(d) = a.degree_bound {
            let _ = writeln!(
                s,
                "  degree bound D = {d} at precision {}, monomial order {}",
                a.relation_precision.unwrap_or(0),
                a.monomial_order
            );
        }
        if !a.torsion_orders.is_empty() {
            let _ = writeln!(s, "  torsion model (M, length): {}", pairs(&a.torsion_orders));
        }
        if !a.transform_torsion_orders.is_empty() {
            let _ = writeln!(s, "  transform torsion model (M, length): {}", pairs(&a.transform_torsion_orders));
        }
        for n in &a.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        s
    }
}

fn cert_tags(e: &ElementEntry) -> String {
    let mut tags = Vec::new();
    if e.nonzero_mod_m2 {
        tags.push("nonzero mod m^2");
    }
    if e.nonzero_in_model {
        tags.push("nonzero in model");
    }
    if tags.is_empty() {
        String::new()
    } else {
        format!(" [{}]", tags.join(", "))
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn pairs(xs: &[(usize, usize)]) -> String {
    xs.iter().map(|(a, b)| format!("({a}, {b})")).collect::<Vec<_>>().join(" ")
}

fn kebab<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|x| x.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}
