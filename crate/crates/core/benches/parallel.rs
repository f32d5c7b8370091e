use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use derlie::classify::{classify_su_family, projective_model};
use derlie::derivation::{DerComplex, DerKind};
use derlie::dsl::parse_model;
use derlie::hom::verify_psi;
use derlie::par::Exec;

const CSTAR: &str = include_str!("../tests/fixtures/example_cstar.dgl");

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn homology_and_brackets(c: &mut Criterion) {
    let model = projective_model(5, 5, Some(2)).unwrap();
    let mut group = c.benchmark_group("homology_brackets_su5_cp5");
    for (label, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(label), &exec, |b, &exec| {
            b.iter(|| {
                let complex = DerComplex::new(&model, 20, DerKind::Full, exec);
                let h = complex.homology().unwrap();
                black_box(complex.homology_bracket(&h).unwrap())
            })
        });
    }
    group.finish();
}

fn correspondence(c: &mut Criterion) {
    let model = parse_model(CSTAR).unwrap().model;
    let mut group = c.benchmark_group("verify_psi_cstar");
    for (label, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(label), &exec, |b, &exec| {
            b.iter(|| black_box(verify_psi(&model, 14, exec)))
        });
    }
    group.finish();
}

fn classification(c: &mut Criterion) {
    let mut group = c.benchmark_group("classify_su_5_5");
    group.sample_size(20);
    for (label, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(label), &exec, |b, &exec| {
            b.iter(|| black_box(classify_su_family(5, 5, 20, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, homology_and_brackets, correspondence, classification);
criterion_main!(benches);
