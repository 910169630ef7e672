use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use cutsphere_bench::{bounded_polyhedron, far_point, random_polyhedron};
use cutsphere_core::geometry::{max_norm_over_polyhedron, project_onto_polyhedron, sphere_polyhedron_feasibility};
use cutsphere_core::problems::{build_packing, PackingSpec};
use cutsphere_core::solver::{solve_inexact, NullSink, SolverConfig};
use cutsphere_core::GeometryConfig;

fn projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("projection");
    for (n, rows) in [(3, 10), (13, 50), (13, 200)] {
        let p = random_polyhedron(n, rows, 7);
        let z = far_point(n, 7);
        group.bench_with_input(BenchmarkId::from_parameter(format!("n{n}_m{rows}")), &(p, z), |b, (p, z)| {
            b.iter(|| project_onto_polyhedron(black_box(p), black_box(z), 1e-10, 200).unwrap())
        });
    }
    group.finish();
}

fn max_norm(c: &mut Criterion) {
    let mut group = c.benchmark_group("max_norm");
    let cfg = GeometryConfig::default();
    for (n, extra) in [(3, 6), (5, 10), (8, 12)] {
        let p = bounded_polyhedron(n, extra, 11);
        group.bench_with_input(BenchmarkId::from_parameter(format!("n{n}_m{}", extra + 2 * n)), &p, |b, p| {
            b.iter(|| max_norm_over_polyhedron(black_box(p), f64::INFINITY, &cfg).unwrap())
        });
    }
    group.finish();
}

fn feasibility(c: &mut Criterion) {
    let mut group = c.benchmark_group("sphere_feasibility");
    let cfg = GeometryConfig::default();
    for (n, rows, alpha) in [(5, 20, 0.5), (13, 60, 1.0)] {
        let p = random_polyhedron(n, rows, 3);
        group.bench_with_input(BenchmarkId::from_parameter(format!("n{n}_m{rows}")), &p, |b, p| {
            b.iter(|| sphere_polyhedron_feasibility(black_box(p), alpha, &cfg).unwrap())
        });
    }
    group.finish();
}

fn two_circle_solve(c: &mut Criterion) {
    let p = build_packing(&PackingSpec::unit(2)).unwrap();
    let cfg = SolverConfig {
        epsilon: 1.0,
        start_level: Some(2.0),
        m_bar: 2000,
        max_iter: 5000,
        ..Default::default()
    };
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    group.bench_function("inexact_two_circles", |b| b.iter(|| solve_inexact(&p, &cfg, &mut NullSink).unwrap()));
    group.finish();
}

criterion_group!(benches, projection, max_norm, feasibility, two_circle_solve);
criterion_main!(benches);
