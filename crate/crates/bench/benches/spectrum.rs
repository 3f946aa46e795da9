use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use noisy_rf::engine::{default_grid, markov_intensities, markov_spectrum, peak_analysis, PhysicalParams};
use noisy_rf::noise::{build_multi_telegraph, TelegraphSpec};
use std::hint::black_box;

fn telegraph(n_sources: usize) -> TelegraphSpec {
    TelegraphSpec {
        beta: 0.1,
        asymmetry: 0.0,
        splitting: 1.0,
        mean_detuning: 0.0,
        n_sources,
    }
}

fn spectrum(c: &mut Criterion) {
    let p = PhysicalParams::new(0.02, 0.005, 0.002).unwrap();
    let mut g = c.benchmark_group("markov_spectrum_4001");
    g.sample_size(10);
    for n in [1, 10, 100] {
        let noise = build_multi_telegraph(&telegraph(n)).unwrap();
        let grid = default_grid(&peak_analysis(&noise, &p).unwrap(), 4001).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n + 1), &n, |b, _| {
            b.iter(|| markov_spectrum(black_box(&noise), &p, &grid).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("markov_intensities");
    for n in [1, 10, 100] {
        let noise = build_multi_telegraph(&telegraph(n)).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n + 1), &n, |b, _| {
            b.iter(|| markov_intensities(black_box(&noise), &p).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, spectrum);
criterion_main!(benches);
