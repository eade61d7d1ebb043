//! Shared fixtures for the criterion benchmarks: deterministic datasets,
//! scaled inputs, and small pre-trained ensembles so each benchmark measures
//! one pipeline stage in isolation.

use surge_al_core::ensemble::{train_ensemble, Ensemble};
use surge_al_core::nnet::{Arch, TrainConfig};
use surge_al_core::pump_data::{generate_synthetic, GeneratorConfig, PumpSample, Scaler};

pub fn dataset(n_samples: usize) -> Vec<PumpSample> {
    generate_synthetic(&GeneratorConfig {
        n_samples,
        seed: 7,
        ..GeneratorConfig::default()
    })
    .expect("benchmark generator config is valid")
}

/// Z-scored features and targets for the whole dataset, scaler fit on all of it.
pub fn scaled(samples: &[PumpSample]) -> (Scaler, Vec<Vec<f64>>, Vec<f64>) {
    let idx: Vec<usize> = (0..samples.len()).collect();
    let scaler = Scaler::fit(samples, &idx).expect("benchmark data is non-degenerate");
    let inputs = samples.iter().map(|s| scaler.apply(s).to_vec()).collect();
    let targets = samples.iter().map(|s| scaler.apply_target(s.sd)).collect();
    (scaler, inputs, targets)
}

/// A small trained ensemble plus the inputs it was fit on.
pub fn trained_ensemble(
    n_samples: usize,
    hidden: Vec<usize>,
    n_members: usize,
) -> (Ensemble, Vec<Vec<f64>>) {
    let samples = dataset(n_samples);
    let (scaler, inputs, targets) = scaled(&samples);
    let mut ensemble = train_ensemble(
        &Arch::new(5, hidden),
        &inputs,
        &targets,
        &TrainConfig {
            epochs: 5,
            seed: 11,
            ..TrainConfig::default()
        },
        n_members,
    )
    .expect("benchmark training succeeds");
    ensemble.scaler_ref = Some(scaler.fingerprint());
    (ensemble, inputs)
}
