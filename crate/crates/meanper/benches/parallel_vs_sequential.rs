//! Compares the data-parallel pipeline against a single-threaded pool on the
//! two hot paths: spectrum construction and series synthesis.

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use meanper::coeff::CoefficientTable;
use meanper::convolver::Convolver;
use meanper::spectrum::build_spectrum;
use meanper::synth::synthesize;

fn with_threads<T>(n: usize, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        f()
    }
}

fn bench_spectrum(c: &mut Criterion) {
    let conv = Convolver::gegenbauer(0.5, 1.0).unwrap();
    let mut group = c.benchmark_group("build_spectrum_24");
    group.sample_size(10);
    group.bench_function("one_thread", |b| {
        b.iter(|| with_threads(1, || build_spectrum(&conv, 24, 1e-12, 64).unwrap()))
    });
    group.bench_function("all_threads", |b| {
        b.iter(|| with_threads(0, || build_spectrum(&conv, 24, 1e-12, 64).unwrap()))
    });
    group.finish();
}

fn bench_synthesize(c: &mut Criterion) {
    let conv = Convolver::gegenbauer(0.5, 1.0).unwrap();
    let spectrum = build_spectrum(&conv, 48, 1e-12, 64).unwrap();
    let mut table = CoefficientTable::new();
    for p in &spectrum.points {
        let m = p.lambda.norm() / std::f64::consts::PI;
        table.insert(p.index, 0, Complex64::new(m.powi(-2), 0.0), 0.0);
    }
    let mut group = c.benchmark_group("synthesize_4001");
    group.sample_size(10);
    group.bench_function("one_thread", |b| {
        b.iter(|| with_threads(1, || synthesize(&table, &spectrum, 4.0, 4001, 0).unwrap()))
    });
    group.bench_function("all_threads", |b| {
        b.iter(|| with_threads(0, || synthesize(&table, &spectrum, 4.0, 4001, 0).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, bench_spectrum, bench_synthesize);
criterion_main!(benches);
