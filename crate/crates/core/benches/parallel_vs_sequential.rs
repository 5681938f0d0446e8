use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nnichain::linalg::Interval;
use nnichain::par;
use nnichain::random::{item_rng, probability_vector};
use nnichain::spectra_entropy::{renyi_entropy, renyi_lower_bound, ProbabilitySequence};
use nnichain::tensor_core::{reduced_spectrum, DenseState, SiteGeometry};

fn sandwich_slack(seed: &u64) -> f64 {
    let mut rng = item_rng(7, *seed);
    let p = ProbabilitySequence::new(probability_vector(&mut rng, 256)).unwrap();
    let s = renyi_entropy(&p, 0.5).unwrap().value;
    (2..p.values().len())
        .filter_map(|r| renyi_lower_bound(p.tail(r), r, 0.5).ok())
        .map(|b| s - b)
        .fold(f64::INFINITY, f64::min)
}

fn half_chain_entropy(seed: &u64) -> f64 {
    let mut rng = item_rng(11, *seed);
    let state = DenseState::random(SiteGeometry::uniform(10, 2).unwrap(), &mut rng);
    let spec = reduced_spectrum(&state, Interval::new(1, 5).unwrap()).unwrap();
    nnichain::spectra_entropy::von_neumann(spec.eigenvalues())
}

fn compare<F>(c: &mut Criterion, name: &str, items: &[u64], f: F)
where
    F: Fn(&u64) -> f64 + Sync + Send + Copy,
{
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("sequential", items.len()), items, |b, xs| {
        b.iter(|| black_box(par::map_sequential(xs, f)))
    });
    group.bench_with_input(BenchmarkId::new("parallel", items.len()), items, |b, xs| {
        b.iter(|| black_box(par::map_parallel(xs, f)))
    });
    group.finish();
}

fn bench_sandwich(c: &mut Criterion) {
    let items: Vec<u64> = (0..256).collect();
    compare(c, "renyi_sandwich", &items, sandwich_slack);
}

fn bench_reduced_entropy(c: &mut Criterion) {
    let items: Vec<u64> = (0..64).collect();
    compare(c, "half_chain_entropy", &items, half_chain_entropy);
}

criterion_group!(benches, bench_sandwich, bench_reduced_entropy);
criterion_main!(benches);
