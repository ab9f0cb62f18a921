use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use trp_bench::gaussian_matrix;
use trp_core::sketch::{low_rank_approx, ssvr, SketchConfig};
use trp_core::{ConventionalRp, DistFamily, EntryDistribution, SeedSpec};

fn range_finder(c: &mut Criterion) {
    let x = gaussian_matrix(400, 400, 1);
    let mut group = c.benchmark_group("range_finder");
    group.sample_size(20);
    for k in [10usize, 25] {
        let rp = ConventionalRp::build(400, k, EntryDistribution::Gaussian, &SeedSpec::new(2)).unwrap();
        group.bench_with_input(BenchmarkId::new("rp", k), &k, |b, _| {
            b.iter(|| low_rank_approx(black_box(&x), &rp).unwrap())
        });
        for t in [1usize, 5] {
            let cfg = SketchConfig {
                dims: vec![20, 20],
                k,
                replicates: t,
                family: DistFamily::Gaussian,
                seed: SeedSpec::new(3),
            };
            group.bench_with_input(BenchmarkId::new(format!("ssvr_t{t}"), k), &cfg, |b, cfg| {
                b.iter(|| ssvr(black_box(&x), cfg).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, range_finder);
criterion_main!(benches);
