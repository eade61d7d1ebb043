//! Z-score normalization fitted on training rows only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pump_data::{PumpSample, N_FEATURES};

const FEATURE_NAMES: [&str; N_FEATURES] = ["tin", "pin", "n_speed", "delta_p", "power"];

/// Per-column mean/std for the five inputs and the surge-distance target,
/// using population standard deviations (divide by n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub feature_means: [f64; N_FEATURES],
    pub feature_stds: [f64; N_FEATURES],
    pub target_mean: f64,
    pub target_std: f64,
}

impl Scaler {
    /// Fits column statistics on `samples[i]` for `i ∈ train_idx` only, so
    /// held-out rows can never leak into the normalization.
    pub fn fit(samples: &[PumpSample], train_idx: &[usize]) -> Result<Scaler> {
        if train_idx.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "scaler needs at least 2 training rows, got {}",
                train_idx.len()
            )));
        }
        if let Some(&bad) = train_idx.iter().find(|&&i| i >= samples.len()) {
            return Err(Error::InvalidArgument(format!(
                "training index {bad} out of range for {} samples",
                samples.len()
            )));
        }

        let n = train_idx.len() as f64;
        let mut feature_means = [0.0; N_FEATURES];
        let mut target_mean = 0.0;
        for &i in train_idx {
            let f = samples[i].features();
            for (acc, v) in feature_means.iter_mut().zip(f) {
                *acc += v;
            }
            target_mean += samples[i].sd;
        }
        for m in &mut feature_means {
            *m /= n;
        }
        target_mean /= n;

        let mut feature_vars = [0.0; N_FEATURES];
        let mut target_var = 0.0;
        for &i in train_idx {
            let f = samples[i].features();
            for (acc, (v, m)) in feature_vars.iter_mut().zip(f.iter().zip(&feature_means)) {
                *acc += (v - m) * (v - m);
            }
            let d = samples[i].sd - target_mean;
            target_var += d * d;
        }

        let mut feature_stds = [0.0; N_FEATURES];
        for (k, (std, var)) in feature_stds.iter_mut().zip(feature_vars).enumerate() {
            *std = (var / n).sqrt();
            if *std == 0.0 {
                return Err(Error::DegenerateFeature(format!(
                    "feature '{}' is constant over the training rows",
                    FEATURE_NAMES[k]
                )));
            }
        }
        let target_std = (target_var / n).sqrt();
        if target_std == 0.0 {
            return Err(Error::DegenerateTarget(
                "surge distance is constant over the training rows".into(),
            ));
        }

        Ok(Scaler {
            feature_means,
            feature_stds,
            target_mean,
            target_std,
        })
    }

    /// The five inputs of `sample`, z-scored.
    pub fn apply(&self, sample: &PumpSample) -> [f64; N_FEATURES] {
        let mut out = sample.features();
        for (v, (m, s)) in out
            .iter_mut()
            .zip(self.feature_means.iter().zip(&self.feature_stds))
        {
            *v = (*v - m) / s;
        }
        out
    }

    /// Surge distance in percent → z-scored target.
    pub fn apply_target(&self, sd: f64) -> f64 {
        (sd - self.target_mean) / self.target_std
    }

    /// Z-scored target → surge distance in percent.
    pub fn invert_target(&self, z: f64) -> f64 {
        z * self.target_std + self.target_mean
    }

    /// Variance in z-scored target units → variance in percent² units.
    pub fn invert_target_variance(&self, variance: f64) -> f64 {
        variance * self.target_std * self.target_std
    }

    /// FNV-1a hash of the exact statistic bits, as 16 hex digits. Lets
    /// artifacts record which normalization produced a set of parameters.
    pub fn fingerprint(&self) -> String {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: f64| {
            for byte in v.to_bits().to_le_bytes() {
                hash ^= byte as u64;
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for k in 0..N_FEATURES {
            eat(self.feature_means[k]);
            eat(self.feature_stds[k]);
        }
        eat(self.target_mean);
        eat(self.target_std);
        format!("{hash:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pump_data::{generate_synthetic, GeneratorConfig};

    fn sample(tin: f64, pin: f64, n: f64, dp: f64, power: f64, sd: f64) -> PumpSample {
        PumpSample {
            tin,
            pin,
            n_speed: n,
            delta_p: dp,
            power,
            qin: 1.0,
            sd,
        }
    }

    #[test]
    fn two_point_fit_matches_hand_arithmetic() {
        // Mean of {a, b} is (a+b)/2; population std is |a−b|/2. The third
        // sample must not influence the fit.
        let samples = vec![
            sample(300.0, 20.0, 2000.0, 10.0, 100.0, -10.0),
            sample(310.0, 40.0, 4000.0, 30.0, 300.0, 30.0),
            sample(999.0, 999.0, 999.0, 999.0, 999.0, 999.0),
        ];
        let scaler = Scaler::fit(&samples, &[0, 1]).unwrap();
        assert_eq!(scaler.feature_means, [305.0, 30.0, 3000.0, 20.0, 200.0]);
        assert_eq!(scaler.feature_stds, [5.0, 10.0, 1000.0, 10.0, 100.0]);
        assert_eq!(scaler.target_mean, 10.0);
        assert_eq!(scaler.target_std, 20.0);
        assert_eq!(scaler.apply(&samples[0]), [-1.0, -1.0, -1.0, -1.0, -1.0]);
        assert_eq!(scaler.apply_target(-10.0), -1.0);
        assert_eq!(scaler.invert_target(-1.0), -10.0);
    }

    #[test]
    fn training_stream_is_standardized_after_apply() {
        let config = GeneratorConfig {
            n_samples: 400,
            seed: 11,
            ..Default::default()
        };
        let samples = generate_synthetic(&config).unwrap();
        let idx: Vec<usize> = (0..samples.len()).collect();
        let scaler = Scaler::fit(&samples, &idx).unwrap();

        let n = samples.len() as f64;
        for k in 0..N_FEATURES {
            let col: Vec<f64> = samples.iter().map(|s| scaler.apply(s)[k]).collect();
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-9, "column {k} mean {mean}");
            assert!(
                (var.sqrt() - 1.0).abs() < 1e-9,
                "column {k} std {}",
                var.sqrt()
            );
        }
        let zt: Vec<f64> = samples.iter().map(|s| scaler.apply_target(s.sd)).collect();
        let mean = zt.iter().sum::<f64>() / n;
        assert!(mean.abs() < 1e-9);
    }

    #[test]
    fn target_round_trip_is_identity() {
        let samples = vec![
            sample(300.0, 20.0, 2000.0, 10.0, 100.0, -10.0),
            sample(310.0, 40.0, 4000.0, 30.0, 300.0, 30.0),
        ];
        let scaler = Scaler::fit(&samples, &[0, 1]).unwrap();
        for sd in [-47.4, 0.0, 13.37, 57.9, 163.2] {
            assert!((scaler.invert_target(scaler.apply_target(sd)) - sd).abs() < 1e-12);
        }
        assert_eq!(scaler.invert_target_variance(1.0), 400.0);
    }

    #[test]
    fn constant_feature_is_a_degenerate_feature_error() {
        let samples = vec![
            sample(300.0, 20.0, 2000.0, 10.0, 100.0, -10.0),
            sample(300.0, 40.0, 4000.0, 30.0, 300.0, 30.0),
        ];
        match Scaler::fit(&samples, &[0, 1]) {
            Err(Error::DegenerateFeature(msg)) => assert!(msg.contains("tin")),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn constant_target_is_a_degenerate_target_error() {
        let samples = vec![
            sample(300.0, 20.0, 2000.0, 10.0, 100.0, 5.0),
            sample(310.0, 40.0, 4000.0, 30.0, 300.0, 5.0),
        ];
        assert!(matches!(
            Scaler::fit(&samples, &[0, 1]),
            Err(Error::DegenerateTarget(_))
        ));
    }

    #[test]
    fn held_out_rows_cannot_influence_the_fit() {
        let config = GeneratorConfig {
            n_samples: 50,
            seed: 3,
            ..Default::default()
        };
        let mut samples = generate_synthetic(&config).unwrap();
        let train_idx: Vec<usize> = (0..25).collect();
        let before = Scaler::fit(&samples, &train_idx).unwrap();
        for s in &mut samples[25..] {
            s.tin += 1000.0;
            s.sd = -99.0;
        }
        let after = Scaler::fit(&samples, &train_idx).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn bad_index_sets_are_rejected() {
        let samples = vec![sample(300.0, 20.0, 2000.0, 10.0, 100.0, -10.0)];
        assert!(Scaler::fit(&samples, &[0]).is_err());
        assert!(Scaler::fit(&samples, &[0, 7]).is_err());
    }

    #[test]
    fn fingerprint_tracks_statistics() {
        let samples = vec![
            sample(300.0, 20.0, 2000.0, 10.0, 100.0, -10.0),
            sample(310.0, 40.0, 4000.0, 30.0, 300.0, 30.0),
            sample(320.0, 60.0, 5000.0, 40.0, 400.0, 50.0),
        ];
        let a = Scaler::fit(&samples, &[0, 1]).unwrap();
        let b = Scaler::fit(&samples, &[0, 1]).unwrap();
        let c = Scaler::fit(&samples, &[0, 2]).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
        assert_eq!(a.fingerprint().len(), 16);
    }
}
