use std::hint::black_box;

use bach3_bench::{generic_metric, sample_point};
use bach3_core::catalog::{verify_solution, SolutionSpec, VerifyOptions};
use bach3_core::curvature::curvature_summary;
use bach3_core::{curvature_stack, DiffConfig, Jet};
use criterion::{criterion_group, criterion_main, Criterion};

fn jets(c: &mut Criterion) {
    let x = Jet::variable(0.4, 0, 6);
    let y = Jet::variable(-0.3, 1, 6);
    c.bench_function("jet/mul_order6", |b| b.iter(|| black_box(x) * black_box(y)));
    c.bench_function("jet/sin_exp_order6", |b| b.iter(|| (black_box(x) * black_box(y)).sin().exp()));
}

fn curvature(c: &mut Criterion) {
    let mc = generic_metric();
    let p = sample_point();
    c.bench_function("curvature/stack_ad", |b| b.iter(|| curvature_stack(&mc, black_box(&p)).unwrap()));
    let fd = generic_metric().with_diff(DiffConfig::finite_difference());
    c.bench_function("curvature/stack_fd", |b| b.iter(|| curvature_stack(&fd, black_box(&p)).unwrap()));
    let mut group = c.benchmark_group("curvature/bach_depth");
    for depth in [0u8, 1, 2] {
        group.bench_function(depth.to_string(), |b| {
            b.iter(|| curvature_summary(&mc, black_box(&p), Some(depth)).unwrap())
        });
    }
    group.finish();
}

fn verification(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    let nariai = SolutionSpec::nariai(1.0, 0.75);
    group.bench_function("nariai_5x3x3", |b| {
        b.iter(|| verify_solution(&nariai, &VerifyOptions::default()).unwrap())
    });
    let rnds = SolutionSpec::rnds(1.0, 0.5, 0.02);
    group.bench_function("rnds_7", |b| b.iter(|| verify_solution(&rnds, &VerifyOptions::default()).unwrap()));
    group.finish();
}

criterion_group!(benches, jets, curvature, verification);
criterion_main!(benches);
