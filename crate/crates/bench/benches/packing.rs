use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use shearpack::offline::solve;
use shearpack::strip::pack_all;
use shearpack::{check_placements, pack_as_sorter, OfflineConfig, PackerKind, Problem, Rat, Region};
use shearpack_bench::{offline_pieces, pieces, reals};

fn strip_packers(c: &mut Criterion) {
    let mut g = c.benchmark_group("strip");
    g.sample_size(10);
    let convex = pieces("convex", 100);
    for kind in [PackerKind::Greedy, PackerKind::Online] {
        g.bench_with_input(BenchmarkId::new(kind.name(), "convex-100"), &convex, |b, ps| {
            b.iter(|| {
                let mut p = kind.build();
                pack_all(&mut p, ps).unwrap();
                p.occupied_width()
            })
        });
    }
    let many = pieces("parallelograms", 5_000);
    g.bench_function("onlinepacker/parallelograms-5000", |b| {
        b.iter(|| {
            let mut p = PackerKind::Online.build();
            pack_all(&mut p, &many).unwrap();
        })
    });
    let mut p = PackerKind::Online.build();
    let placed = pack_all(&mut p, &many).unwrap();
    g.bench_function("validity-oracle/5000", |b| {
        b.iter(|| check_placements(&placed, &Region::Strip { height: Rat::one() }).is_ok())
    });
    let stream = reals(1_000);
    g.bench_function("reduction/onlinepacker-1000", |b| {
        b.iter(|| pack_as_sorter(PackerKind::Online.build(), &stream).unwrap().0.total_cost().unwrap())
    });
    g.finish();
}

fn offline(c: &mut Criterion) {
    let mut g = c.benchmark_group("offline");
    g.sample_size(10);
    let config = OfflineConfig::default();
    for (problem, n) in [(Problem::Strip, 200), (Problem::Perimeter, 200), (Problem::Bins, 1_000), (Problem::Square, 1_000)] {
        let input = offline_pieces(problem, n);
        g.bench_with_input(BenchmarkId::new(problem.name(), input.len()), &input, |b, ps| {
            b.iter(|| solve(problem, ps, &config).unwrap().cost)
        });
    }
    g.finish();
}

criterion_group!(benches, strip_packers, offline);
criterion_main!(benches);
