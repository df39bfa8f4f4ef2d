//! Sequential against rayon-parallel assembly and solve.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use fracbeam::assembly::assemble_stiffness;
use fracbeam::par::Exec;
use fracbeam::{AssemblyOptions, BeamSpec, BoundaryCondition, ElementKind, FractionalParams, LoadCase, Mesh, Mode, SolutionField};

const PATHS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn spec(lf: f64) -> BeamSpec {
    let frac = FractionalParams::new(0.8, lf).unwrap();
    BeamSpec::slender(BoundaryCondition::ClampedClamped, LoadCase::Udl { q0: 1.0 }, frac).unwrap()
}

fn stiffness(c: &mut Criterion) {
    let mut group = c.benchmark_group("stiffness");
    group.sample_size(10);
    for ne in [100, 200, 400] {
        let mesh = Mesh::new(1.0, ne, ElementKind::TwoNoded).unwrap();
        let s = spec(0.1);
        for (name, exec) in PATHS {
            let opts = AssemblyOptions { exec, ..AssemblyOptions::default() };
            group.bench_with_input(BenchmarkId::new(name, ne), &ne, |b, _| {
                b.iter(|| assemble_stiffness(black_box(&mesh), &s, Mode::Fractional, opts).unwrap())
            });
        }
    }
    group.finish();
}

fn full_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    let mesh = Mesh::new(1.0, 200, ElementKind::ThreeNoded).unwrap();
    let s = spec(0.2);
    for (name, exec) in PATHS {
        let opts = AssemblyOptions { exec, ..AssemblyOptions::default() };
        group.bench_function(name, |b| {
            b.iter(|| SolutionField::solve(black_box(&mesh), &s, Mode::Fractional, opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, stiffness, full_solve);
criterion_main!(benches);
