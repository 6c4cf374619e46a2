use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wvc_bench::family;
use wvc_core::instgen::{Model, WeightModel};
use wvc_core::instrument::{branching_number, RecurrenceSpec};
use wvc_core::oracle::exact_min_weight_vc;
use wvc_core::weight::parse_decimal;
use wvc_core::{solve, FMode, SolveConfig};

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    for model in [
        Model::CubicPairing,
        Model::SubcubicErdos,
        Model::TriangleGadget,
    ] {
        for (name, inst) in family(model, &[20, 40, 60], WeightModel::UniformInt(9)) {
            for (label, audit) in [("audit", true), ("plain", false)] {
                let cfg = SolveConfig {
                    mode: FMode::Robust,
                    audit,
                    initial_cover: inst.designed_cover.clone(),
                    ..Default::default()
                };
                group.bench_with_input(BenchmarkId::new(label, &name), &inst, |b, inst| {
                    b.iter(|| solve(black_box(&inst.graph), &inst.weights, &cfg).unwrap())
                });
            }
        }
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    for (name, inst) in family(Model::CubicPairing, &[16, 20], WeightModel::UniformInt(9)) {
        group.bench_function(&name, |b| {
            b.iter(|| exact_min_weight_vc(black_box(&inst.graph), &inst.weights).unwrap())
        });
    }
    group.finish();
}

fn bench_bound(c: &mut Criterion) {
    let rec = RecurrenceSpec::new(
        ["4.688", "4.688", "4.688", "2.844"]
            .iter()
            .map(|s| parse_decimal(s).unwrap())
            .collect(),
    )
    .unwrap();
    c.bench_function("branching_number", |b| {
        b.iter(|| branching_number(black_box(&rec), 1e-12))
    });
}

criterion_group!(benches, bench_solve, bench_oracle, bench_bound);
criterion_main!(benches);
