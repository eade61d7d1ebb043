//! Deep ensembles: M independently seeded heteroscedastic networks whose
//! predictions are pooled into a single Gaussian via uniform mixture moments.
//!
//! Member `m` derives its seed as `config.seed ⊕ m`, which keeps a single
//! user-facing seed while guaranteeing pairwise-distinct member seeds (XOR
//! with distinct values is injective). Members may train in parallel; the
//! result is identical regardless of scheduling because every member's
//! randomness is fixed up front by its own seed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nnet::{train, Arch, GaussianPrediction, NetworkParams, TrainConfig};

/// A trained ensemble plus the bookkeeping needed to reuse it faithfully.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub members: Vec<NetworkParams>,
    pub member_seeds: Vec<u64>,
    /// Fingerprint of the scaler the members were trained under, if any.
    pub scaler_ref: Option<String>,
}

impl Ensemble {
    /// Checks the structural invariants: at least one member, one shared
    /// architecture, pairwise-distinct seeds.
    pub fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::InvalidArgument("ensemble has no members".into()));
        }
        if self.member_seeds.len() != self.members.len() {
            return Err(Error::InvalidArgument(format!(
                "{} members but {} member seeds",
                self.members.len(),
                self.member_seeds.len()
            )));
        }
        let signature = self.members[0].dims_signature();
        if self.members.iter().any(|m| m.dims_signature() != signature) {
            return Err(Error::InvalidArgument(
                "ensemble members do not share one architecture".into(),
            ));
        }
        let mut seeds = self.member_seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.member_seeds.len() {
            return Err(Error::InvalidArgument(
                "member seeds must be pairwise distinct".into(),
            ));
        }
        Ok(())
    }

    /// Per-member forward passes at `x`, in member order.
    pub fn predict_members(&self, x: &[f64]) -> Result<Vec<GaussianPrediction>> {
        self.members.iter().map(|m| m.forward(x)).collect()
    }

    /// Pooled Gaussian at `x`.
    pub fn predict_pooled(&self, x: &[f64]) -> Result<GaussianPrediction> {
        if self.members.is_empty() {
            return Err(Error::InvalidArgument("ensemble has no members".into()));
        }
        Ok(pool_predictions(&self.predict_members(x)?))
    }

    /// Pooled Gaussians for a batch of inputs, reusing one forward workspace
    /// per member.
    pub fn predict_pooled_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<GaussianPrediction>> {
        if self.members.is_empty() {
            return Err(Error::InvalidArgument("ensemble has no members".into()));
        }
        let mut member_preds: Vec<Vec<GaussianPrediction>> = Vec::with_capacity(self.members.len());
        for member in &self.members {
            let mut ws = member.workspace();
            let preds: Result<Vec<GaussianPrediction>> =
                xs.iter().map(|x| member.forward_with(x, &mut ws)).collect();
            member_preds.push(preds?);
        }
        Ok((0..xs.len())
            .map(|i| {
                let at_x: Vec<GaussianPrediction> =
                    member_preds.iter().map(|preds| preds[i]).collect();
                pool_predictions(&at_x)
            })
            .collect())
    }

    /// Warm-start retraining: every member continues from its current
    /// weights for `config.epochs` fresh epochs. `round` diversifies the
    /// batch shuffling across successive retrains so no round replays the
    /// previous round's batch order.
    pub fn retrain(
        &mut self,
        inputs: &[Vec<f64>],
        targets: &[f64],
        config: &TrainConfig,
        round: u64,
    ) -> Result<()> {
        self.validate()?;
        let results: Result<Vec<NetworkParams>> = self
            .members
            .par_iter()
            .zip(&self.member_seeds)
            .map(|(member, &seed)| {
                let mut params = member.clone();
                let member_config = TrainConfig {
                    seed: crate::seed::mix2(seed, round, 0x5e7a),
                    ..config.clone()
                };
                train(&mut params, inputs, targets, &member_config)?;
                Ok(params)
            })
            .collect();
        self.members = results?;
        Ok(())
    }
}

/// Trains `n_members` networks from scratch, member `m` seeded with
/// `config.seed ⊕ m` for both initialization and batch shuffling.
pub fn train_ensemble(
    arch: &Arch,
    inputs: &[Vec<f64>],
    targets: &[f64],
    config: &TrainConfig,
    n_members: usize,
) -> Result<Ensemble> {
    if n_members == 0 {
        return Err(Error::InvalidArgument(
            "n_members must be at least 1".into(),
        ));
    }
    let member_seeds: Vec<u64> = (0..n_members as u64).map(|m| config.seed ^ m).collect();
    let members: Result<Vec<NetworkParams>> = member_seeds
        .par_iter()
        .map(|&seed| {
            let mut params = NetworkParams::init(arch.clone(), seed)?;
            let member_config = TrainConfig {
                seed,
                ..config.clone()
            };
            train(&mut params, inputs, targets, &member_config)?;
            Ok(params)
        })
        .collect();
    Ok(Ensemble {
        members: members?,
        member_seeds,
        scaler_ref: None,
    })
}

/// Uniform Gaussian-mixture moments over member predictions:
/// `μ* = (1/M)·Σ μ_m` and `σ*² = (1/M)·Σ (σ_m² + μ_m²) − μ*²`.
///
/// Computed in the algebraically identical two-pass form
/// `σ*² = mean aleatoric variance + population variance of member means`,
/// which cannot go negative through cancellation.
pub fn pool_predictions(predictions: &[GaussianPrediction]) -> GaussianPrediction {
    assert!(
        !predictions.is_empty(),
        "pooling requires at least one prediction"
    );
    let m = predictions.len() as f64;
    let mean = predictions.iter().map(|p| p.mean).sum::<f64>() / m;
    let aleatoric = predictions.iter().map(|p| p.variance).sum::<f64>() / m;
    let epistemic = predictions
        .iter()
        .map(|p| (p.mean - mean) * (p.mean - mean))
        .sum::<f64>()
        / m;
    GaussianPrediction {
        mean,
        variance: aleatoric + epistemic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use rand::Rng;

    fn toy_data(n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = rng_from(77);
        (0..n)
            .map(|i| {
                let x = -1.0 + 2.0 * (i as f64) / (n - 1) as f64;
                let noise: f64 = rng.gen_range(-0.05..0.05);
                (vec![x], x * x + noise)
            })
            .unzip()
    }

    fn quick_config() -> TrainConfig {
        TrainConfig {
            epochs: 8,
            batch_size: 16,
            seed: 42,
            ..TrainConfig::default()
        }
    }

    fn small_arch() -> Arch {
        Arch::new(1, vec![8, 8])
    }

    #[test]
    fn training_is_deterministic() {
        let (xs, ys) = toy_data(32);
        let a = train_ensemble(&small_arch(), &xs, &ys, &quick_config(), 3).unwrap();
        let b = train_ensemble(&small_arch(), &xs, &ys, &quick_config(), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn member_seeds_are_xor_derived_and_distinct() {
        let (xs, ys) = toy_data(32);
        let config = quick_config();
        let ensemble = train_ensemble(&small_arch(), &xs, &ys, &config, 5).unwrap();
        let expected: Vec<u64> = (0..5).map(|m| config.seed ^ m).collect();
        assert_eq!(ensemble.member_seeds, expected);
        ensemble.validate().unwrap();
    }

    #[test]
    fn five_members_end_up_pairwise_different() {
        let (xs, ys) = toy_data(32);
        let ensemble = train_ensemble(&small_arch(), &xs, &ys, &quick_config(), 5).unwrap();
        for i in 0..5 {
            for j in (i + 1)..5 {
                assert_ne!(
                    ensemble.members[i], ensemble.members[j],
                    "members {i} and {j} coincide"
                );
            }
        }
    }

    #[test]
    fn single_member_pooling_is_the_identity() {
        let (xs, ys) = toy_data(32);
        let ensemble = train_ensemble(&small_arch(), &xs, &ys, &quick_config(), 1).unwrap();
        let x = vec![0.3];
        let pooled = ensemble.predict_pooled(&x).unwrap();
        let single = ensemble.members[0].forward(&x).unwrap();
        assert_eq!(pooled.mean, single.mean);
        assert!((pooled.variance - single.variance).abs() < 1e-15);
    }

    #[test]
    fn predict_members_matches_manual_forwards() {
        let (xs, ys) = toy_data(32);
        let ensemble = train_ensemble(&small_arch(), &xs, &ys, &quick_config(), 5).unwrap();
        let x = vec![-0.4];
        let preds = ensemble.predict_members(&x).unwrap();
        assert_eq!(preds.len(), 5);
        for (pred, member) in preds.iter().zip(&ensemble.members) {
            let manual = member.forward(&x).unwrap();
            assert_eq!(pred.mean, manual.mean);
            assert_eq!(pred.variance, manual.variance);
        }
    }

    #[test]
    fn pooling_worked_example() {
        // Members (μ=0, σ²=1) and (μ=2, σ²=1):
        // μ* = 1, σ*² = ((1+0) + (1+4))/2 − 1 = 2.
        let preds = [
            GaussianPrediction {
                mean: 0.0,
                variance: 1.0,
            },
            GaussianPrediction {
                mean: 2.0,
                variance: 1.0,
            },
        ];
        let pooled = pool_predictions(&preds);
        assert!((pooled.mean - 1.0).abs() < 1e-15);
        assert!((pooled.variance - 2.0).abs() < 1e-15);
    }

    #[test]
    fn identical_members_pool_to_themselves() {
        let preds = [GaussianPrediction {
            mean: 3.5,
            variance: 0.25,
        }; 2];
        let pooled = pool_predictions(&preds);
        assert_eq!(pooled.mean, 3.5);
        assert!((pooled.variance - 0.25).abs() < 1e-15);
    }

    #[test]
    fn pooled_matches_direct_mixture_formula_on_random_sets() {
        let mut rng = rng_from(1234);
        for _ in 0..100 {
            let m = rng.gen_range(1..=8);
            let preds: Vec<GaussianPrediction> = (0..m)
                .map(|_| GaussianPrediction {
                    mean: rng.gen_range(-50.0..50.0),
                    variance: rng.gen_range(1e-6..25.0),
                })
                .collect();
            let pooled = pool_predictions(&preds);
            let inv_m = 1.0 / m as f64;
            let mu_star = preds.iter().map(|p| p.mean).sum::<f64>() * inv_m;
            let second = preds
                .iter()
                .map(|p| p.variance + p.mean * p.mean)
                .sum::<f64>()
                * inv_m;
            let direct = second - mu_star * mu_star;
            assert!((pooled.mean - mu_star).abs() < 1e-12);
            assert!(
                (pooled.variance - direct).abs() < 1e-12 * direct.abs().max(1.0),
                "{} vs {direct}",
                pooled.variance
            );
        }
    }

    #[test]
    fn pooled_variance_dominates_mean_aleatoric_variance() {
        let preds = [
            GaussianPrediction {
                mean: -1.0,
                variance: 0.5,
            },
            GaussianPrediction {
                mean: 0.5,
                variance: 1.5,
            },
            GaussianPrediction {
                mean: 2.0,
                variance: 0.1,
            },
        ];
        let pooled = pool_predictions(&preds);
        let aleatoric = preds.iter().map(|p| p.variance).sum::<f64>() / 3.0;
        assert!(pooled.variance >= aleatoric);
        // Equality holds exactly when all means coincide.
        let flat = [
            GaussianPrediction {
                mean: 1.0,
                variance: 0.5,
            },
            GaussianPrediction {
                mean: 1.0,
                variance: 1.5,
            },
        ];
        assert!((pool_predictions(&flat).variance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pooling_is_permutation_invariant_and_mean_is_bracketed() {
        let preds = [
            GaussianPrediction {
                mean: -3.0,
                variance: 0.2,
            },
            GaussianPrediction {
                mean: 1.0,
                variance: 2.0,
            },
            GaussianPrediction {
                mean: 4.0,
                variance: 0.7,
            },
            GaussianPrediction {
                mean: 0.1,
                variance: 1.1,
            },
        ];
        let mut reversed = preds;
        reversed.reverse();
        let a = pool_predictions(&preds);
        let b = pool_predictions(&reversed);
        assert!((a.mean - b.mean).abs() < 1e-12);
        assert!((a.variance - b.variance).abs() < 1e-12);
        assert!(a.mean >= -3.0 && a.mean <= 4.0);
    }

    #[test]
    fn batch_prediction_matches_pointwise_prediction() {
        let (xs, ys) = toy_data(32);
        let ensemble = train_ensemble(&small_arch(), &xs, &ys, &quick_config(), 3).unwrap();
        let queries: Vec<Vec<f64>> = vec![vec![-0.9], vec![0.0], vec![0.7]];
        let batch = ensemble.predict_pooled_batch(&queries).unwrap();
        for (x, b) in queries.iter().zip(&batch) {
            let single = ensemble.predict_pooled(x).unwrap();
            assert_eq!(b.mean, single.mean);
            assert_eq!(b.variance, single.variance);
        }
    }

    #[test]
    fn retrain_is_deterministic_and_moves_the_weights() {
        let (xs, ys) = toy_data(32);
        let config = quick_config();
        let mut a = train_ensemble(&small_arch(), &xs, &ys, &config, 2).unwrap();
        let mut b = a.clone();
        let frozen = a.clone();
        a.retrain(&xs, &ys, &config, 1).unwrap();
        b.retrain(&xs, &ys, &config, 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, frozen);
        // A different round shuffles differently.
        let mut c = frozen.clone();
        c.retrain(&xs, &ys, &config, 2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_members_is_rejected() {
        let (xs, ys) = toy_data(16);
        assert!(matches!(
            train_ensemble(&small_arch(), &xs, &ys, &quick_config(), 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn validate_catches_broken_invariants() {
        let (xs, ys) = toy_data(16);
        let good = train_ensemble(&small_arch(), &xs, &ys, &quick_config(), 2).unwrap();

        let mut dup_seeds = good.clone();
        dup_seeds.member_seeds[1] = dup_seeds.member_seeds[0];
        assert!(dup_seeds.validate().is_err());

        let mut mixed_arch = good.clone();
        mixed_arch.members[1] = NetworkParams::init(Arch::new(1, vec![4]), 0).unwrap();
        assert!(mixed_arch.validate().is_err());

        let empty = Ensemble {
            members: vec![],
            member_seeds: vec![],
            scaler_ref: None,
        };
        assert!(empty.validate().is_err());
    }
}
