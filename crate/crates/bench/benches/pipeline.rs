//! Stage-by-stage benchmarks of the surrogate pipeline: forward/backward
//! passes, one training epoch, pooled ensemble prediction, acquisition
//! scoring, dataset generation, and the metrics suite.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use surge_al_bench::{dataset, scaled, trained_ensemble};
use surge_al_core::active_learning::acquire_top_variance;
use surge_al_core::metrics::{metrics_report, MetricsOptions};
use surge_al_core::nnet::{train, Arch, NetworkParams, TrainConfig};
use surge_al_core::pump_data::{generate_synthetic, GeneratorConfig};

fn bench_forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward");
    for width in [64usize, 256] {
        let params =
            NetworkParams::init(Arch::new(5, vec![width, width, width]), 3).expect("valid arch");
        let mut ws = params.workspace();
        let x = [0.3, -1.2, 0.8, 0.05, -0.4];
        group.bench_with_input(BenchmarkId::from_parameter(width), &width, |b, _| {
            b.iter(|| params.forward_with(black_box(&x), &mut ws).unwrap())
        });
    }
    group.finish();
}

fn bench_backward_batch(c: &mut Criterion) {
    let samples = dataset(32);
    let (_, inputs, targets) = scaled(&samples);
    let params = NetworkParams::init(Arch::new(5, vec![64, 64, 64]), 3).expect("valid arch");
    c.bench_function("backward_batch32_w64", |b| {
        b.iter(|| {
            params
                .backward(black_box(&inputs), black_box(&targets))
                .unwrap()
        })
    });
}

fn bench_train_epoch(c: &mut Criterion) {
    let samples = dataset(256);
    let (_, inputs, targets) = scaled(&samples);
    let arch = Arch::new(5, vec![64, 64, 64]);
    let config = TrainConfig {
        epochs: 1,
        seed: 5,
        ..TrainConfig::default()
    };
    c.bench_function("train_epoch_n256_w64", |b| {
        b.iter(|| {
            let mut params = NetworkParams::init(arch.clone(), 5).unwrap();
            train(
                &mut params,
                black_box(&inputs),
                black_box(&targets),
                &config,
            )
            .unwrap()
        })
    });
}

fn bench_pooled_predict(c: &mut Criterion) {
    let (ensemble, inputs) = trained_ensemble(500, vec![64, 64], 5);
    c.bench_function("pooled_predict_n500_m5", |b| {
        b.iter(|| ensemble.predict_pooled_batch(black_box(&inputs)).unwrap())
    });
}

fn bench_acquisition(c: &mut Criterion) {
    let (ensemble, inputs) = trained_ensemble(500, vec![64, 64], 5);
    let candidates: Vec<usize> = (0..250).collect();
    c.bench_function("acquire_top_variance_c250_k50", |b| {
        b.iter(|| acquire_top_variance(&ensemble, &inputs, black_box(&candidates), 50).unwrap())
    });
}

fn bench_generate(c: &mut Criterion) {
    let config = GeneratorConfig {
        n_samples: 1000,
        seed: 1,
        ..GeneratorConfig::default()
    };
    c.bench_function("generate_synthetic_n1000", |b| {
        b.iter(|| generate_synthetic(black_box(&config)).unwrap())
    });
}

fn bench_metrics(c: &mut Criterion) {
    let samples = dataset(1000);
    let truth: Vec<f64> = samples.iter().map(|s| s.sd).collect();
    let pred: Vec<f64> = truth.iter().map(|y| y * 1.02 + 0.3).collect();
    let options = MetricsOptions::default();
    c.bench_function("metrics_report_n1000", |b| {
        b.iter(|| metrics_report(black_box(&pred), black_box(&truth), &options).unwrap())
    });
}

criterion_group!(
    benches,
    bench_forward,
    bench_backward_batch,
    bench_train_epoch,
    bench_pooled_predict,
    bench_acquisition,
    bench_generate,
    bench_metrics
);
criterion_main!(benches);
