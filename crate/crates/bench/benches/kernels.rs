use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use torspec_bench::{lcg_matrix, shell_case};
use torspec_core::classical::{band_bounds, q_infinity_interval, rational_directions};
use torspec_core::eig::{eigenvalues, singular_min, EigBackend, EigOptions};
use torspec_core::spectral::build_mode_shell;
use torspec_core::symbol::generate_random_symbol;

fn shell(c: &mut Criterion) {
    c.bench_function("mode_shell_h0.01", |b| b.iter(|| build_mode_shell(black_box(0.01), 0.85, 1.0).unwrap()));
    c.bench_function("assemble_h0.05", |b| b.iter(|| shell_case(black_box(0.05))));
}

fn eig(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigenvalues");
    g.sample_size(10);
    for n in [64, 188] {
        let a = lcg_matrix(n, 7);
        for (name, backend) in [("native", EigBackend::Native), ("faer", EigBackend::Faer)] {
            let opts = EigOptions { backend, ..Default::default() };
            g.bench_with_input(BenchmarkId::new(name, n), &a, |b, a| b.iter(|| eigenvalues(a, &opts).unwrap()));
        }
    }
    let s = shell_case(0.05);
    g.bench_function("shell_h0.05_native", |b| b.iter(|| s.spectrum(&EigOptions::default()).unwrap()));
    g.finish();
}

fn svd(c: &mut Criterion) {
    let a = lcg_matrix(128, 3);
    c.bench_function("singular_min_128", |b| b.iter(|| singular_min(black_box(&a))));
}

fn classical(c: &mut Criterion) {
    let q = generate_random_symbol(2, 2.0, 1).unwrap();
    let dirs = rational_directions(2);
    c.bench_function("q_infinity_all_directions", |b| {
        b.iter(|| dirs.iter().map(|&d| q_infinity_interval(&q, d, 1.0).unwrap().q_inf).sum::<f64>())
    });
    let mut g = c.benchmark_group("band");
    g.sample_size(10);
    g.bench_function("band_bounds_720", |b| b.iter(|| band_bounds(&q, 1.0, 720).unwrap()));
    g.finish();
}

criterion_group!(benches, shell, eig, svd, classical);
criterion_main!(benches);
