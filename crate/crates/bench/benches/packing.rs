use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use squarepack_core::lattice::pack_bounded_rect;
use squarepack_core::recursive::{run, RunOptions};
use squarepack_core::sequence::enumerate_primes;
use squarepack_core::verifier::{brute_force_overlap, sweep_overlaps};
use squarepack_core::{PackParams, Rect, SidelengthFamily};

fn sieve(c: &mut Criterion) {
    let mut g = c.benchmark_group("sieve");
    g.sample_size(10);
    for limit in [1_000_000u64, 10_000_000, 100_000_000] {
        g.bench_function(format!("primes_to_{limit}"), |b| {
            b.iter(|| enumerate_primes(black_box(limit)).unwrap())
        });
    }
    g.finish();
}

fn lattice(c: &mut Criterion) {
    let fam = SidelengthFamily::ap(1.0, 0.0).unwrap();
    for m in [4u64, 16] {
        let n0 = (4752 * m.pow(4)).max(2_000_000);
        let params = PackParams::new(0.6, m, n0, n0 + 1).unwrap();
        let r = Rect::square(0.0, 0.0, 2.5 * m as f64 * (n0 as f64).powf(-0.6)).unwrap();
        c.bench_function(&format!("lattice_M{m}"), |b| {
            b.iter(|| pack_bounded_rect(&r, &fam, &params, n0).unwrap())
        });
    }
}

fn recursive(c: &mut Criterion) {
    let fam = SidelengthFamily::ap(1.0, 0.0).unwrap();
    let n0 = 1_216_512;
    let params = PackParams::new(2.0 / 3.0, 4, n0, n0 + 10_000).unwrap();
    let mut g = c.benchmark_group("recursive");
    g.sample_size(10);
    g.bench_function("ap_10k_squares", |b| {
        b.iter(|| run(&fam, &params, &RunOptions::default()).unwrap())
    });
    g.finish();
}

fn random_rects(n: usize, seed: u64) -> Vec<Rect> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = (n as f64).sqrt() * 2.0;
    (0..n)
        .map(|_| {
            let (x, y) = (rng.gen_range(0.0..span), rng.gen_range(0.0..span));
            Rect::from_origin(x, y, rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0)).unwrap()
        })
        .collect()
}

fn overlap(c: &mut Criterion) {
    let mut g = c.benchmark_group("overlap");
    for n in [1_000usize, 10_000] {
        g.bench_function(format!("sweep_{n}"), |b| {
            b.iter_batched(
                || random_rects(n, 3),
                |r| sweep_overlaps(&r, 1e-9),
                BatchSize::LargeInput,
            )
        });
        g.bench_function(format!("brute_{n}"), |b| {
            b.iter_batched(
                || random_rects(n, 3),
                |r| brute_force_overlap(&r, 1e-9).unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    g.bench_function("sweep_100000", |b| {
        b.iter_batched(
            || random_rects(100_000, 3),
            |r| sweep_overlaps(&r, 1e-9),
            BatchSize::LargeInput,
        )
    });
    g.finish();
}

criterion_group!(benches, sieve, lattice, recursive, overlap);
criterion_main!(benches);
