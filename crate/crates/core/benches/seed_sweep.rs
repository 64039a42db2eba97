use banditlab::par::{map_seeds, map_seeds_sequential, seed_range};
use banditlab::stochastic::{StochasticEnv, Ucb1};
use banditlab::{run_episode, RngStream};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn ucb_regret(seed: u64, horizon: usize) -> f64 {
    let mut env = StochasticEnv::bernoulli(&[0.5, 0.4, 0.45, 0.3]).unwrap();
    let mut agent = Ucb1::new(4, horizon).unwrap();
    let ep = run_episode(&mut env, &mut agent, horizon, &RngStream::new(seed)).unwrap();
    ep.report.pseudo_regret.unwrap()
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("ucb1_seed_sweep");
    group.sample_size(10);
    for &seeds in &[16u64, 64] {
        let ids = seed_range(seeds);
        group.bench_with_input(BenchmarkId::new("parallel", seeds), &ids, |b, ids| {
            b.iter(|| map_seeds(black_box(ids), |s| ucb_regret(s, 5_000)))
        });
        group.bench_with_input(BenchmarkId::new("sequential", seeds), &ids, |b, ids| {
            b.iter(|| map_seeds_sequential(black_box(ids), |s| ucb_regret(s, 5_000)))
        });
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
