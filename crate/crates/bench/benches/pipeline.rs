use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;
use studiomap::features::{estimate_bpm, frame_features, ExtractionConfig};
use studiomap::forest::{train_forest, ForestConfig};
use studiomap::som::{train_som, SomConfig};
use studiomap::stats::{manova_two_way, YearCoding};
use studiomap_bench::{click_signal, feature_table, style_labels};

fn features(c: &mut Criterion) {
    let signal = click_signal(128.0, 30.0, 44_100);
    let cfg = ExtractionConfig::default();
    c.bench_function("frame_features_30s", |b| {
        b.iter(|| frame_features(black_box(&signal), &cfg).unwrap())
    });
    c.bench_function("estimate_bpm_30s", |b| {
        b.iter(|| estimate_bpm(black_box(&signal), &cfg).unwrap())
    });
}

fn manova(c: &mut Criterion) {
    let (rows, nations, years) = feature_table(9000, 1);
    c.bench_function("manova_numeric_9000", |b| {
        b.iter(|| manova_two_way(black_box(&rows), &nations, &years, YearCoding::Numeric).unwrap())
    });
    c.bench_function("manova_categorical_9000", |b| {
        b.iter(|| manova_two_way(black_box(&rows), &nations, &years, YearCoding::Categorical).unwrap())
    });
}

fn som(c: &mut Criterion) {
    let (rows, _, _) = feature_table(2000, 2);
    let cfg = SomConfig {
        epochs: 2,
        ..SomConfig::default()
    };
    let mut group = c.benchmark_group("som");
    group.sample_size(10);
    group.bench_function("train_30x20_2000x2", |b| {
        b.iter(|| train_som(black_box(&rows), &cfg).unwrap())
    });
    group.finish();
}

fn forest(c: &mut Criterion) {
    let (rows, _, _) = feature_table(4600, 3);
    let labels = style_labels(&rows, 4);
    let cfg = ForestConfig::default();
    let mut group = c.benchmark_group("forest");
    group.sample_size(10);
    group.bench_function("train_100_trees_4600", |b| {
        b.iter_batched(
            || cfg.clone(),
            |cfg| train_forest(&rows, &labels, &cfg).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, features, manova, som, forest);
criterion_main!(benches);
