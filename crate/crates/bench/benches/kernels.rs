use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::Point2;

use nived_bench::Fixture;
use nived_core::assembly::{
    apply_dirichlet, assemble_mem_stiffness, assemble_nived_stiffness, compute_all_cell_operators, Constraints,
};
use nived_core::materials::d_matrix;
use nived_core::solvers::linear_solve;
use nived_core::{GaussRule, PlaneCondition};

fn maxent(c: &mut Criterion) {
    let fx = Fixture::new(16);
    // A fixed interior lattice keeps the workload identical between runs.
    let points: Vec<Point2<f64>> = (0..32)
        .flat_map(|i| (0..32).map(move |j| Point2::new((i as f64 + 0.37) / 32.0, (j as f64 + 0.61) / 32.0)))
        .collect();
    let mut group = c.benchmark_group("maxent");
    group.bench_function("values_1024_points", |b| {
        b.iter(|| points.iter().map(|p| fx.basis.evaluate(black_box(p)).unwrap().values.len()).sum::<usize>())
    });
    group.bench_function("gradients_1024_points", |b| {
        b.iter(|| {
            points
                .iter()
                .map(|p| fx.basis.evaluate_with_gradients(black_box(p)).unwrap().values.len())
                .sum::<usize>()
        })
    });
    group.finish();
}

fn operators_and_assembly(c: &mut Criterion) {
    let d = d_matrix(1.0, 0.3, PlaneCondition::PlaneStrain).unwrap();
    let mut group = c.benchmark_group("assembly");
    group.sample_size(20);
    for n in [8, 16, 32] {
        let fx = Fixture::new(n);
        let nodes = fx.n_nodes();
        group.bench_with_input(BenchmarkId::new("cell_operators", nodes), &fx, |b, fx| {
            b.iter(|| compute_all_cell_operators(&fx.partition, &fx.basis).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("nodal_stiffness", nodes), &fx, |b, fx| {
            b.iter(|| assemble_nived_stiffness(&fx.ops, nodes, &d).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gauss6_stiffness", nodes), &fx, |b, fx| {
            b.iter(|| assemble_mem_stiffness(&fx.mesh, &fx.basis, &d, GaussRule::Six).unwrap())
        });
    }
    group.finish();
}

fn sparse_solve(c: &mut Criterion) {
    let d = d_matrix(1.0, 0.3, PlaneCondition::PlaneStrain).unwrap();
    let mut group = c.benchmark_group("solve");
    group.sample_size(20);
    for n in [16, 32] {
        let fx = Fixture::new(n);
        let k = assemble_nived_stiffness(&fx.ops, fx.n_nodes(), &d).unwrap();
        let mut constraints = Constraints::new();
        constraints
            .fix_tagged(&fx.mesh, &["left"], [true, true], |_| nalgebra::Vector2::zeros())
            .unwrap();
        let f: Vec<f64> = (0..k.nrows()).map(|i| if i % 2 == 1 { -1e-3 } else { 0.0 }).collect();
        let reduced = apply_dirichlet(&k, &f, &constraints).unwrap();
        group.bench_function(BenchmarkId::new("cholesky", k.nrows()), |b| {
            b.iter(|| linear_solve(&reduced.matrix, &reduced.rhs, 1e-10).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, maxent, operators_and_assembly, sparse_solve);
criterion_main!(benches);
