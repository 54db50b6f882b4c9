use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use helixflow::series::parse_rational;
use helixflow::{
    expand_profile_series, Branch, CrossSectionMap, FlowSampler, GridSpec, HelixConfig, Profile,
};

fn config() -> HelixConfig {
    HelixConfig::new(1.0, Branch::Positive, 1e-3, 1e-8).unwrap()
}

fn series(c: &mut Criterion) {
    c.bench_function("series f64 order 12", |b| {
        b.iter(|| expand_profile_series(black_box(1.0), 12).unwrap())
    });
    let k = parse_rational("1").unwrap();
    c.bench_function("series exact order 8", |b| {
        b.iter(|| expand_profile_series(black_box(k.clone()), 8).unwrap())
    });
}

fn profile(c: &mut Criterion) {
    let cfg = config();
    c.bench_function("profile build t_max 0.25", |b| {
        b.iter(|| Profile::build(black_box(&cfg), 0.25).unwrap())
    });
}

fn section(c: &mut Criterion) {
    let map = CrossSectionMap::new(&config()).unwrap();
    c.bench_function("slice at x", |b| {
        b.iter(|| map.slice(black_box(1.013)).unwrap().y_max)
    });
    let slice = map.slice(1.013).unwrap();
    c.bench_function("t_from_y on a slice", |b| {
        b.iter(|| slice.t_from_y(black_box(0.021)).unwrap())
    });
}

fn sampling(c: &mut Criterion) {
    let map = Arc::new(CrossSectionMap::new(&config()).unwrap());
    let raw = FlowSampler::raw(map.clone());
    let grid = GridSpec::new([16, 16, 16], [0.95, 1.05, -0.05, 0.05, -0.05, 0.05]).unwrap();
    let mut group = c.benchmark_group("sample");
    group.sample_size(10);
    group.bench_function("raw 16^3", |b| {
        b.iter(|| raw.sample_grid(black_box(&grid)).unwrap())
    });
    let cut = FlowSampler::cutoff(map, 1e-3).unwrap();
    group.bench_function("cutoff 16^3", |b| {
        b.iter(|| cut.sample_grid(black_box(&grid)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, series, profile, section, sampling);
criterion_main!(benches);
