use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use quadfree::oracle::{rng, unit_vector};
use quadfree::{
    boundary_step, build_free_set, canonicalize, jacobi_eigen, lift, separate, FreeSet, DEFAULT_ZERO_TOL,
};
use quadfree_bench::{planar_case, random_instance, random_symmetric, section_six, unit_cone, wide_case};

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("jacobi_eigen");
    for p in [4, 16, 64] {
        let a = random_symmetric(p, 7);
        group.bench_with_input(BenchmarkId::from_parameter(p), &a, |b, a| b.iter(|| jacobi_eigen(black_box(a))));
    }
    group.finish();
}

fn canonical(c: &mut Criterion) {
    let mut group = c.benchmark_group("canonicalize");
    for p in [2, 10, 40] {
        let qc = random_instance(p, 11);
        group.bench_with_input(BenchmarkId::from_parameter(p), &qc, |b, qc| {
            b.iter(|| canonicalize(black_box(qc), DEFAULT_ZERO_TOL))
        });
    }
    group.finish();
    let qc = random_instance(10, 11);
    c.bench_function("lift/10", |b| b.iter(|| lift(black_box(&qc.q), &qc.b, qc.c)));
}

fn margins(c: &mut Criterion) {
    let mut group = c.benchmark_group("margin");
    for (label, cd) in [("planar", planar_case()), ("k8", wide_case(8, 3))] {
        let k = cd.n() + cd.m();
        let mut r = rng(19);
        let points: Vec<Vec<f64>> = (0..256).map(|_| unit_vector(&mut r, k)).collect();
        for fs in [FreeSet::CGLambda(cd.clone()), FreeSet::CPhiLambda(cd.clone()), FreeSet::CRPhiLambda(cd.clone())] {
            group.bench_function(format!("{}/{label}", fs.name()), |b| {
                b.iter(|| points.iter().map(|w| fs.margin(black_box(w))).sum::<f64>())
            });
        }
    }
    group.finish();
}

fn steps(c: &mut Criterion) {
    let fs = FreeSet::CRPhiLambda(planar_case());
    let apex = [-1.0, -1.0, 0.0];
    let ray = [0.3, 0.2, 1.0];
    c.bench_function("boundary_step/CRPhiLambda", |b| {
        b.iter(|| boundary_step(&fs, black_box(&apex), black_box(&ray), 1e-9))
    });
}

fn cuts(c: &mut Criterion) {
    let qc = section_six();
    let cone = unit_cone(&qc);
    c.bench_function("separate/section_six", |b| b.iter(|| separate(black_box(&qc), &cone, DEFAULT_ZERO_TOL)));
    let mut group = c.benchmark_group("separate");
    for p in [5, 20] {
        let qc = random_instance(p, 23);
        let cf = canonicalize(&qc, DEFAULT_ZERO_TOL).expect("canonical form");
        if build_free_set(&cf).is_err() {
            continue;
        }
        let cone = unit_cone(&qc);
        group.bench_with_input(BenchmarkId::from_parameter(p), &qc, |b, qc| {
            b.iter(|| separate(black_box(qc), &cone, DEFAULT_ZERO_TOL))
        });
    }
    group.finish();
}

criterion_group!(benches, eigen, canonical, margins, steps, cuts);
criterion_main!(benches);
