use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use shearpack::adversary::{play, CoarsenParams, CoarseningAdversary, TieBreak, UnitAdversary};
use shearpack::sorting::{choose_params, run_stream};
use shearpack::{BalancedSorter, BoxSorter, Rat, SortArray};
use shearpack_bench::reals;

fn sorters(c: &mut Criterion) {
    let mut g = c.benchmark_group("sort-stream");
    for n in [1_000usize, 10_000] {
        let stream = reals(n);
        g.bench_with_input(BenchmarkId::new("balanced", n), &stream, |b, s| {
            b.iter(|| {
                let mut array = SortArray::with_capacity(n, n);
                run_stream(&mut BalancedSorter::new(n), &mut array, s).unwrap();
                array.total_cost().unwrap()
            })
        });
        let params = choose_params(n, &Rat::one()).unwrap();
        g.bench_with_input(BenchmarkId::new("boxsorter", n), &stream, |b, s| {
            b.iter(|| {
                let mut sorter = BoxSorter::new(n, params.clone()).unwrap();
                let mut array = SortArray::with_capacity(n, sorter.capacity());
                run_stream(&mut sorter, &mut array, s).unwrap();
                array.total_cost().unwrap()
            })
        });
    }
    g.finish();
}

fn adversaries(c: &mut Criterion) {
    let mut g = c.benchmark_group("adversary");
    g.sample_size(10);
    let n = 10_000;
    g.bench_function("unit-vs-balanced", |b| {
        b.iter(|| {
            let mut array = SortArray::with_capacity(n, n);
            play(&mut UnitAdversary::new(n), &mut BalancedSorter::new(n), &mut array, n).unwrap();
        })
    });
    let n = 1 << 14;
    g.bench_function("coarsen-vs-boxsorter", |b| {
        b.iter_batched(
            || {
                let sorter = BoxSorter::new(n, choose_params(n, &Rat::one()).unwrap()).unwrap();
                let array = SortArray::with_capacity(n, sorter.capacity());
                let gamma = Rat::new(array.len() as i64, n as i64);
                let adv = CoarseningAdversary::new(n, CoarsenParams::for_instance(n, &gamma).unwrap(), TieBreak::Random { seed: 1 });
                (sorter, array, adv)
            },
            |(mut sorter, mut array, mut adv)| {
                let _ = play(&mut adv, &mut sorter, &mut array, n);
            },
            BatchSize::LargeInput,
        )
    });
    g.finish();
}

criterion_group!(benches, sorters, adversaries);
criterion_main!(benches);
