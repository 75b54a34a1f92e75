//! Criterion comparison of the rayon-backed data-parallel paths against the
//! sequential fallback. Real benchmark bodies land with the modules they
//! exercise; until then this measures the dispatch shim itself.

use criterion::{criterion_group, criterion_main, Criterion};
use mtlab_core::par;
use mtlab_core::Parallelism;

fn bench_map(c: &mut Criterion) {
    let mut group = c.benchmark_group("map_indexed");
    for mode in [Parallelism::Auto, Parallelism::Sequential] {
        group.bench_function(format!("{mode:?}"), |b| {
            b.iter(|| {
                let v = par::map_indexed(mode, 4096, |i| (i as f64).sqrt().sin());
                criterion::black_box(v)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_map);
criterion_main!(benches);
