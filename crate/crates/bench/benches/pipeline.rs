use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use curvediff::curve::CurveRing;
use curvediff::differentials::torsion_for_relations;
use curvediff::implicitize::relations_stable;
use curvediff::report::{analyze_curve, parse_curve, AnalysisOptions};
use curvediff::transform::build_transform;
use std::hint::black_box;

const CURVES: &[(&str, &str)] = &[
    ("e345", "t^3\nt^4\nt^5\n"),
    ("conductor7", "t^4 + t^5\nt^7 + t^10\nt^8 + t^10\nt^9 + t^10\n"),
    ("qh", "t^5\nt^8 + t^11\nt^9 + t^11\nt^12 + t^11\n"),
];

fn ring(text: &str) -> CurveRing {
    CurveRing::analyze(&parse_curve(text, "bench").unwrap().generators).unwrap()
}

fn stages(c: &mut Criterion) {
    let mut g = c.benchmark_group("stages");
    g.sample_size(10);
    for &(name, text) in CURVES {
        let gens = parse_curve(text, name).unwrap().generators;
        g.bench_with_input(BenchmarkId::new("analyze", name), &gens, |b, gens| {
            b.iter(|| CurveRing::analyze(black_box(gens)).unwrap())
        });
        let r = ring(text);
        g.bench_with_input(BenchmarkId::new("relations", name), &r, |b, r| {
            b.iter(|| relations_stable(black_box(r), None).unwrap())
        });
        let rs = relations_stable(&r, None).unwrap();
        g.bench_with_input(BenchmarkId::new("torsion", name), &(&r, &rs), |b, (r, rs)| {
            b.iter(|| torsion_for_relations(black_box(r), rs).unwrap())
        });
        if r.conductor_in_m_squared().unwrap() {
            g.bench_with_input(BenchmarkId::new("transform", name), &r, |b, r| {
                b.iter(|| build_transform(black_box(r)).unwrap())
            });
        }
    }
    g.finish();
}

fn full_report(c: &mut Criterion) {
    let mut g = c.benchmark_group("report");
    g.sample_size(10);
    for &(name, text) in CURVES {
        let input = parse_curve(text, name).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(name), &input, |b, input| {
            b.iter(|| analyze_curve(black_box(input), AnalysisOptions::default()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, stages, full_report);
criterion_main!(benches);
