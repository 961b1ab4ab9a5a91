use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use morsecover::covering::{greedy_select, packing_count, partition_disjoint, satellite_search};
use morsecover::{Norm, Space};
use morsecover_bench::random_balls;

fn selection(c: &mut Criterion) {
    let sp = Space::euclidean(2);
    let mut g = c.benchmark_group("greedy_select+partition");
    for n in [200, 1000, 5000] {
        let fam = random_balls(&sp, n, 0.005, 0.05, 7);
        g.bench_with_input(BenchmarkId::from_parameter(n), &fam, |b, fam| {
            b.iter(|| {
                let order = greedy_select(fam, 1.2).unwrap();
                black_box(partition_disjoint(fam, &order).unwrap().m())
            })
        });
    }
    g.finish();
}

fn packing(c: &mut Criterion) {
    let mut g = c.benchmark_group("packing_count");
    for (name, sp) in [("l2_d2", Space::euclidean(2)), ("linf_d3", Space::new(3, Norm::Linf).unwrap())] {
        g.bench_function(name, |b| b.iter(|| black_box(packing_count(&sp, 2.0, 1.0, true, false, 500, 1).unwrap().lower)));
    }
    g.finish();
}

fn satellites(c: &mut Criterion) {
    let sp = Space::euclidean(2);
    c.bench_function("satellite_search d2", |b| {
        b.iter(|| black_box(satellite_search(&sp, 1.0, 1.2, 1000, 3).unwrap().sets.len()))
    });
}

criterion_group!(benches, selection, packing, satellites);
criterion_main!(benches);
