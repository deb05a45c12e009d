use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64 as C;
use std::hint::black_box;
use weylcouple::sl_weyl::{weyl_function, HalfLineProblem};
use weylcouple::sweep::{map_with, Mode};

fn weyl_sweep(c: &mut Criterion) {
    let prob = HalfLineProblem::power_weights(1.0, 0.5);
    let zs: Vec<C> = (0..32).map(|k| C::new(0.0, 10f64.powf(-2.0 + k as f64 / 8.0))).collect();
    let mut g = c.benchmark_group("weyl_sweep");
    g.sample_size(10);
    for (name, mode) in [("sequential", Mode::Sequential), ("parallel", Mode::Parallel)] {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| map_with(mode, black_box(&zs), |z| weyl_function(&prob, *z).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, weyl_sweep);
criterion_main!(benches);
