//! Pool-based active learning: iteratively acquire the pool points with the
//! highest pooled predictive variance, retrain the ensemble, and track test
//! metrics — plus a random-acquisition baseline under the identical
//! configuration and shared initialization.
//!
//! The campaign is deterministic given `(dataset, config, strategy)`. One
//! campaign seed derives every stream it needs (partition, training, and
//! per-iteration acquisition), so two strategies run from the same config
//! share their partition and their initial ensemble exactly.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{train_ensemble, Ensemble};
use crate::error::{Error, Result};
use crate::metrics::{metrics_report, MetricsOptions, MetricsReport};
use crate::nnet::{Arch, TrainConfig};
use crate::pump_data::{PumpSample, Scaler};
use crate::seed::{mix, mix2, rng_from};

/// Stream tags for deriving independent RNG seeds from the campaign seed.
const PARTITION_STREAM: u64 = 0xA1;
const TRAIN_STREAM: u64 = 0xB2;
const ACQUISITION_STREAM: u64 = 0xC3;
const COLD_RESTART_STREAM: u64 = 0xD4;

/// Acquisition strategy for one campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Algorithm-driven: pick the candidates with the largest pooled
    /// predictive variance.
    TopVariance,
    /// Uniform random acquisition from the pool.
    Random,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::TopVariance => "top_variance",
            Strategy::Random => "random",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Strategy> {
        match s {
            "top_variance" => Ok(Strategy::TopVariance),
            "random" => Ok(Strategy::Random),
            other => Err(Error::InvalidArgument(format!(
                "unknown strategy '{other}', expected 'top_variance' or 'random'"
            ))),
        }
    }
}

/// Disjoint index sets over one dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolState {
    pub train_idx: Vec<usize>,
    pub pool_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
}

impl PoolState {
    /// Checks pairwise disjointness, index range, and non-empty train set.
    pub fn validate(&self, n_samples: usize) -> Result<()> {
        if self.train_idx.is_empty() {
            return Err(Error::InvalidArgument("train set is empty".into()));
        }
        let mut seen = HashSet::with_capacity(
            self.train_idx.len() + self.pool_idx.len() + self.test_idx.len(),
        );
        for (name, set) in [
            ("train", &self.train_idx),
            ("pool", &self.pool_idx),
            ("test", &self.test_idx),
        ] {
            for &i in set.iter() {
                if i >= n_samples {
                    return Err(Error::InvalidArgument(format!(
                        "{name} index {i} out of range for {n_samples} samples"
                    )));
                }
                if !seen.insert(i) {
                    return Err(Error::InvalidArgument(format!(
                        "index {i} appears in more than one set (last seen in {name})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Campaign configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ALConfig {
    /// Size of the seed training set carved out at partition time.
    pub initial_train_size: usize,
    /// Candidate over-sampling factor M: each iteration scores min(M·K, |pool|) candidates.
    pub candidate_multiplier: usize,
    /// Acquisition batch size K.
    pub batch_k: usize,
    /// Maximum number of acquisition iterations.
    pub iterations: usize,
    /// Training-set size at which the campaign stops acquiring.
    pub total_budget: usize,
    /// Fraction of the dataset held out as the fixed test set.
    pub test_fraction: f64,
    /// Ensemble size.
    pub n_members: usize,
    /// Warm-start retraining from the previous iteration's weights; when
    /// false every iteration retrains from scratch (ablation mode).
    pub warm_start: bool,
    /// Campaign seed; derives the partition, training, and acquisition
    /// streams. The nested `train_config.seed` is ignored inside campaigns.
    pub seed: u64,
    pub arch: Arch,
    pub train_config: TrainConfig,
}

impl Default for ALConfig {
    fn default() -> ALConfig {
        ALConfig {
            initial_train_size: 50,
            candidate_multiplier: 5,
            batch_k: 50,
            iterations: 43,
            total_budget: 2200,
            test_fraction: 0.2,
            n_members: 5,
            warm_start: true,
            seed: 0,
            arch: Arch::default(),
            train_config: TrainConfig::default(),
        }
    }
}

impl ALConfig {
    /// Planned number of acquired points: capped by both the iteration count
    /// and the remaining budget.
    pub fn planned_acquisition(&self) -> usize {
        let by_iterations = self.iterations.saturating_mul(self.batch_k);
        let by_budget = self.total_budget.saturating_sub(self.initial_train_size);
        by_iterations.min(by_budget)
    }

    /// Validates the configuration against a dataset of `n_samples` rows,
    /// before any training happens.
    pub fn validate_for(&self, n_samples: usize) -> Result<()> {
        self.train_config.validate()?;
        self.arch.validate()?;
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.initial_train_size < 2 {
            return Err(Error::InvalidArgument(format!(
                "initial_train_size must be at least 2 to fit the scaler, got {}",
                self.initial_train_size
            )));
        }
        if self.candidate_multiplier == 0 || self.batch_k == 0 {
            return Err(Error::InvalidArgument(
                "candidate_multiplier and batch_k must be at least 1".into(),
            ));
        }
        if self.n_members == 0 {
            return Err(Error::InvalidArgument(
                "n_members must be at least 1".into(),
            ));
        }
        if self.total_budget < self.initial_train_size {
            return Err(Error::InvalidArgument(format!(
                "total_budget {} is below initial_train_size {}",
                self.total_budget, self.initial_train_size
            )));
        }
        let test_size = test_size(n_samples, self.test_fraction);
        if test_size == 0 || test_size >= n_samples {
            return Err(Error::InvalidArgument(format!(
                "test_fraction {} leaves no usable split of {n_samples} samples",
                self.test_fraction
            )));
        }
        let available = n_samples - test_size;
        if self.initial_train_size >= available {
            return Err(Error::InvalidArgument(format!(
                "initial_train_size {} must be below the non-test size {available}",
                self.initial_train_size
            )));
        }
        let final_train = self.initial_train_size + self.planned_acquisition();
        if final_train > available {
            return Err(Error::InvalidArgument(format!(
                "planned final train size {final_train} exceeds the {available} non-test samples"
            )));
        }
        Ok(())
    }
}

/// One row of a learning curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub train_size: usize,
    /// Dataset indices acquired this iteration, in acquisition order; empty
    /// for the initial record.
    pub selected_idx: Vec<usize>,
    pub test_rmse: f64,
    pub test_r2: f64,
    pub test_mape: f64,
    pub test_max_error: f64,
    pub acceptance_accuracy: f64,
    /// Mean pooled predictive variance over the remaining pool, in physical
    /// (percent²) units; 0.0 once the pool is empty.
    pub mean_pool_variance: f64,
}

/// A full campaign trace for one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub strategy: Strategy,
    pub records: Vec<IterationRecord>,
    pub config: ALConfig,
}

/// Everything a campaign produces.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignOutcome {
    pub curve: LearningCurve,
    pub ensemble: Ensemble,
    pub scaler: Scaler,
    pub state: PoolState,
}

fn test_size(n_samples: usize, test_fraction: f64) -> usize {
    (test_fraction * n_samples as f64).round() as usize
}

/// Seeded shuffle partition: the test set is carved first, the initial train
/// set is drawn from the remainder, and everything else becomes the pool.
pub fn partition(
    n_samples: usize,
    test_fraction: f64,
    initial_train_size: usize,
    seed: u64,
) -> Result<PoolState> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n_test = test_size(n_samples, test_fraction);
    if n_test == 0 || n_test >= n_samples {
        return Err(Error::InvalidArgument(format!(
            "test_fraction {test_fraction} leaves no usable split of {n_samples} samples"
        )));
    }
    if initial_train_size == 0 || initial_train_size >= n_samples - n_test {
        return Err(Error::InvalidArgument(format!(
            "initial_train_size {initial_train_size} infeasible with {} non-test samples",
            n_samples - n_test
        )));
    }

    let mut indices: Vec<usize> = (0..n_samples).collect();
    let mut rng = rng_from(seed);
    rand::seq::SliceRandom::shuffle(&mut indices[..], &mut rng);
    let test_idx = indices[..n_test].to_vec();
    let train_idx = indices[n_test..n_test + initial_train_size].to_vec();
    let pool_idx = indices[n_test + initial_train_size..].to_vec();
    Ok(PoolState {
        train_idx,
        pool_idx,
        test_idx,
    })
}

/// Draws `min(M·K, |pool|)` distinct pool indices uniformly without
/// replacement. Errors with [`Error::PoolExhausted`] on an empty pool.
pub fn sample_candidates(
    pool_idx: &[usize],
    m: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    if pool_idx.is_empty() {
        return Err(Error::PoolExhausted);
    }
    let amount = m.saturating_mul(k).min(pool_idx.len());
    let chosen = rand::seq::index::sample(rng, pool_idx.len(), amount);
    Ok(chosen.iter().map(|i| pool_idx[i]).collect())
}

/// Returns the (up to) `k` candidates with the highest pooled predictive
/// variance, ties broken by ascending dataset index. `inputs` must hold the
/// scaled feature vector of every dataset row so candidates can be looked up
/// directly.
pub fn acquire_top_variance(
    ensemble: &Ensemble,
    inputs: &[Vec<f64>],
    candidates: &[usize],
    k: usize,
) -> Result<Vec<usize>> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidates to score".into()));
    }
    let candidate_inputs: Vec<Vec<f64>> = candidates.iter().map(|&i| inputs[i].clone()).collect();
    let preds = ensemble.predict_pooled_batch(&candidate_inputs)?;
    let mut scored: Vec<(usize, f64)> = candidates
        .iter()
        .zip(&preds)
        .map(|(&idx, p)| (idx, p.variance))
        .collect();
    scored.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored.into_iter().map(|(idx, _)| idx).collect())
}

/// Pooled test-set metrics in physical surge-distance units.
pub fn evaluate_ensemble(
    ensemble: &Ensemble,
    scaler: &Scaler,
    samples: &[PumpSample],
    options: &MetricsOptions,
) -> Result<MetricsReport> {
    let inputs: Vec<Vec<f64>> = samples.iter().map(|s| scaler.apply(s).to_vec()).collect();
    let preds = ensemble.predict_pooled_batch(&inputs)?;
    let pred_sd: Vec<f64> = preds.iter().map(|p| scaler.invert_target(p.mean)).collect();
    let truth: Vec<f64> = samples.iter().map(|s| s.sd).collect();
    metrics_report(&pred_sd, &truth, options)
}

/// Top-variance campaign (Algorithm-driven acquisition).
pub fn al_loop(dataset: &[PumpSample], config: &ALConfig) -> Result<CampaignOutcome> {
    run_campaign(dataset, config, Strategy::TopVariance, |_, _| {})
}

/// Random-acquisition baseline under the identical configuration; shares the
/// partition and the initial ensemble with [`al_loop`] for the same config.
pub fn random_baseline_loop(dataset: &[PumpSample], config: &ALConfig) -> Result<CampaignOutcome> {
    run_campaign(dataset, config, Strategy::Random, |_, _| {})
}

/// Runs one campaign, invoking `observer` with the pool state after every
/// appended record (including the initial one). The observer exists so
/// instrumented runs can assert loop invariants from outside.
pub fn run_campaign<F>(
    dataset: &[PumpSample],
    config: &ALConfig,
    strategy: Strategy,
    mut observer: F,
) -> Result<CampaignOutcome>
where
    F: FnMut(&PoolState, &IterationRecord),
{
    config.validate_for(dataset.len())?;
    let options = MetricsOptions::default();
    let train_seed = mix(config.seed, TRAIN_STREAM);
    let effective_train = |seed: u64| TrainConfig {
        seed,
        ..config.train_config.clone()
    };

    let mut state = partition(
        dataset.len(),
        config.test_fraction,
        config.initial_train_size,
        mix(config.seed, PARTITION_STREAM),
    )?;
    let test_samples: Vec<PumpSample> = state.test_idx.iter().map(|&i| dataset[i]).collect();

    // Initial ensemble on the seed training set.
    let mut scaler = Scaler::fit(dataset, &state.train_idx)?;
    let (train_x, train_y) = scaled_subset(dataset, &state.train_idx, &scaler);
    let mut ensemble = train_ensemble(
        &config.arch,
        &train_x,
        &train_y,
        &effective_train(train_seed),
        config.n_members,
    )?;
    ensemble.scaler_ref = Some(scaler.fingerprint());

    let mut records = Vec::with_capacity(config.iterations + 1);
    let record = make_record(
        0,
        &state,
        &[],
        &ensemble,
        &scaler,
        dataset,
        &test_samples,
        &options,
    )?;
    observer(&state, &record);
    records.push(record);

    for iteration in 1..=config.iterations {
        let remaining_budget = config.total_budget.saturating_sub(state.train_idx.len());
        if remaining_budget == 0 || state.pool_idx.is_empty() {
            break;
        }
        let k_eff = config.batch_k.min(remaining_budget);
        let mut acq_rng = rng_from(mix2(config.seed, ACQUISITION_STREAM, iteration as u64));

        let selected = match strategy {
            Strategy::TopVariance => {
                let candidates = sample_candidates(
                    &state.pool_idx,
                    config.candidate_multiplier,
                    config.batch_k,
                    &mut acq_rng,
                )?;
                let inputs: Vec<Vec<f64>> =
                    dataset.iter().map(|s| scaler.apply(s).to_vec()).collect();
                acquire_top_variance(&ensemble, &inputs, &candidates, k_eff)?
            }
            Strategy::Random => sample_candidates(&state.pool_idx, 1, k_eff, &mut acq_rng)?,
        };

        // Move the acquisitions from pool to train (Algorithm step: the
        // selected points leave the pool permanently).
        let chosen: HashSet<usize> = selected.iter().copied().collect();
        state.train_idx.extend(&selected);
        state.pool_idx.retain(|i| !chosen.contains(i));

        scaler = Scaler::fit(dataset, &state.train_idx)?;
        let (train_x, train_y) = scaled_subset(dataset, &state.train_idx, &scaler);
        if config.warm_start {
            ensemble.retrain(
                &train_x,
                &train_y,
                &effective_train(train_seed),
                iteration as u64,
            )?;
        } else {
            ensemble = train_ensemble(
                &config.arch,
                &train_x,
                &train_y,
                &effective_train(mix2(train_seed, iteration as u64, COLD_RESTART_STREAM)),
                config.n_members,
            )?;
        }
        ensemble.scaler_ref = Some(scaler.fingerprint());

        let record = make_record(
            iteration,
            &state,
            &selected,
            &ensemble,
            &scaler,
            dataset,
            &test_samples,
            &options,
        )?;
        observer(&state, &record);
        records.push(record);
    }

    Ok(CampaignOutcome {
        curve: LearningCurve {
            strategy,
            records,
            config: config.clone(),
        },
        ensemble,
        scaler,
        state,
    })
}

fn scaled_subset(
    dataset: &[PumpSample],
    idx: &[usize],
    scaler: &Scaler,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let inputs = idx
        .iter()
        .map(|&i| scaler.apply(&dataset[i]).to_vec())
        .collect();
    let targets = idx
        .iter()
        .map(|&i| scaler.apply_target(dataset[i].sd))
        .collect();
    (inputs, targets)
}

#[allow(clippy::too_many_arguments)]
fn make_record(
    iteration: usize,
    state: &PoolState,
    selected: &[usize],
    ensemble: &Ensemble,
    scaler: &Scaler,
    dataset: &[PumpSample],
    test_samples: &[PumpSample],
    options: &MetricsOptions,
) -> Result<IterationRecord> {
    let report = evaluate_ensemble(ensemble, scaler, test_samples, options)?;
    let mean_pool_variance = if state.pool_idx.is_empty() {
        0.0
    } else {
        let pool_inputs: Vec<Vec<f64>> = state
            .pool_idx
            .iter()
            .map(|&i| scaler.apply(&dataset[i]).to_vec())
            .collect();
        let preds = ensemble.predict_pooled_batch(&pool_inputs)?;
        let sum: f64 = preds
            .iter()
            .map(|p| scaler.invert_target_variance(p.variance))
            .sum();
        sum / preds.len() as f64
    };
    Ok(IterationRecord {
        iteration,
        train_size: state.train_idx.len(),
        selected_idx: selected.to_vec(),
        test_rmse: report.rmse,
        test_r2: report.r2,
        test_mape: report.mape_pct,
        test_max_error: report.max_error,
        acceptance_accuracy: report.acceptance_accuracy_pct,
        mean_pool_variance,
    })
}
