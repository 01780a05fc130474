//! Scan and census throughput, rayon against a plain loop over the same work.
//!
//! With `--no-default-features` the library's own parallel paths are
//! sequential too, so "library" then measures the fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rayon::prelude::*;

use polyscan::lfpe::{analyze_automorphism, LfpeCaps};
use polyscan::orbits::affine_conjugacy_orbits;
use polyscan::scan::{scan, Predicate, ScanConfig, Scanner, Shape};
use polyscan::FieldCtx;

fn scans(c: &mut Criterion) {
    let mut g = c.benchmark_group("scan");
    g.sample_size(10);
    for (shape, p) in [(Shape::IdentityAffineDeg2, 2), (Shape::DependenceDeg2, 3)] {
        let cfg = ScanConfig::new(shape, p, 1, Predicate::Mock).with_shards(64);
        let scanner = Scanner::new(cfg).unwrap();
        let total = scanner.total();
        let label = format!("{}-q{p}", shape.name());
        g.throughput(Throughput::Elements(total));
        g.bench_with_input(BenchmarkId::new("sequential", &label), &scanner, |b, s| {
            b.iter(|| s.scan_range(0, total).unwrap().len())
        });
        g.bench_with_input(BenchmarkId::new("rayon", &label), &scanner, |b, s| {
            b.iter(|| (0..64).into_par_iter().map(|i| s.shard_range(i)).map(|(lo, hi)| s.scan_range(lo, hi).unwrap().len()).sum::<usize>())
        });
        g.bench_with_input(BenchmarkId::new("library", &label), &scanner, |b, s| b.iter(|| s.run().unwrap().len()));
    }
    g.finish();
}

fn census(c: &mut Criterion) {
    let f = FieldCtx::shared(3, 1).unwrap();
    let (space, recs) = scan(&ScanConfig::new(Shape::IdentityAffineDeg2, 3, 1, Predicate::Automorphism)).unwrap();
    let ring = space.ring().clone();
    let reps = affine_conjugacy_orbits(&f, 3);
    let maps: Vec<_> = recs
        .iter()
        .take(200)
        .map(|r| reps[40].to_polymap(&ring).compose(&space.map_from_coeffs(&r.coeffs), 2).unwrap())
        .collect();
    let caps = LfpeCaps::default();
    let mut g = c.benchmark_group("lfpe-analyze-q3");
    g.sample_size(10);
    g.throughput(Throughput::Elements(maps.len() as u64));
    g.bench_function("sequential", |b| b.iter(|| maps.iter().filter(|m| analyze_automorphism(m, &caps).is_locally_finite()).count()));
    g.bench_function("rayon", |b| b.iter(|| maps.par_iter().filter(|m| analyze_automorphism(m, &caps).is_locally_finite()).count()));
    g.finish();
}

criterion_group!(benches, scans, census);
criterion_main!(benches);
