//! Versioned ensemble checkpoints: JSON with the full member parameters, the
//! member seeds, and the scaler they were trained under. Floats serialize in
//! shortest round-trip form, so save → load → save is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use surge_al_core::ensemble::Ensemble;
use surge_al_core::pump_data::{Scaler, N_FEATURES};

use crate::{runtime, CliResult};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub strategy: String,
    pub campaign_seed: u64,
    pub ensemble: Ensemble,
    pub scaler: Scaler,
}

impl Checkpoint {
    pub fn new(strategy: String, campaign_seed: u64, ensemble: Ensemble, scaler: Scaler) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            strategy,
            campaign_seed,
            ensemble,
            scaler,
        }
    }

    /// Consistency checks run on every load (and before every save):
    /// supported version, structurally valid ensemble, pump-data input
    /// width, and a scaler fingerprint matching the one recorded at
    /// training time.
    pub fn validate(&self) -> CliResult<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(runtime(format!(
                "unsupported checkpoint version {} (this tool reads version {CHECKPOINT_VERSION})",
                self.version
            )));
        }
        self.ensemble
            .validate()
            .map_err(|e| runtime(format!("invalid checkpoint ensemble: {e}")))?;
        let input_dim = self.ensemble.members[0].arch.input_dim;
        if input_dim != N_FEATURES {
            return Err(runtime(format!(
                "checkpoint architecture expects {input_dim} inputs, pump data has {N_FEATURES}"
            )));
        }
        let fingerprint = self.scaler.fingerprint();
        if self.ensemble.scaler_ref.as_deref() != Some(fingerprint.as_str()) {
            return Err(runtime(format!(
                "checkpoint scaler (fingerprint {fingerprint}) does not match the scaler the \
                 members were trained under ({})",
                self.ensemble.scaler_ref.as_deref().unwrap_or("<none>")
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        self.validate()?;
        let mut json = serde_json::to_string_pretty(self)
            .map_err(|e| runtime(format!("cannot serialize checkpoint: {e}")))?;
        json.push('\n');
        fs::write(path, json).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> CliResult<Checkpoint> {
        let text = fs::read_to_string(path)
            .map_err(|e| runtime(format!("cannot read checkpoint {}: {e}", path.display())))?;
        let checkpoint: Checkpoint = serde_json::from_str(&text)
            .map_err(|e| runtime(format!("corrupt checkpoint {}: {e}", path.display())))?;
        checkpoint.validate()?;
        Ok(checkpoint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use surge_al_core::ensemble::train_ensemble;
    use surge_al_core::nnet::{Arch, TrainConfig};
    use surge_al_core::pump_data::{generate_synthetic, GeneratorConfig};

    fn toy_checkpoint() -> Checkpoint {
        let samples = generate_synthetic(&GeneratorConfig {
            n_samples: 40,
            seed: 3,
            ..Default::default()
        })
        .unwrap();
        let idx: Vec<usize> = (0..samples.len()).collect();
        let scaler = Scaler::fit(&samples, &idx).unwrap();
        let xs: Vec<Vec<f64>> = samples.iter().map(|s| scaler.apply(s).to_vec()).collect();
        let ys: Vec<f64> = samples.iter().map(|s| scaler.apply_target(s.sd)).collect();
        let mut ensemble = train_ensemble(
            &Arch::new(N_FEATURES, vec![6]),
            &xs,
            &ys,
            &TrainConfig {
                epochs: 2,
                ..TrainConfig::default()
            },
            2,
        )
        .unwrap();
        ensemble.scaler_ref = Some(scaler.fingerprint());
        Checkpoint::new("top_variance".into(), 7, ensemble, scaler)
    }

    #[test]
    fn save_load_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        let checkpoint = toy_checkpoint();
        checkpoint.save(&path).unwrap();
        let loaded = Checkpoint::load(&path).unwrap();
        assert_eq!(checkpoint, loaded);

        // Saving the loaded copy reproduces the file byte for byte.
        let path2 = dir.path().join("ckpt2.json");
        loaded.save(&path2).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
    }

    #[test]
    fn truncated_checkpoints_fail_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        toy_checkpoint().save(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() / 2]).unwrap();
        let err = Checkpoint::load(&path).unwrap_err();
        assert!(format!("{err}").contains("corrupt checkpoint"));
    }

    #[test]
    fn version_and_scaler_mismatches_are_descriptive() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        let good = toy_checkpoint();

        let mut future = good.clone();
        future.version = 99;
        assert!(format!("{}", future.validate().unwrap_err()).contains("version 99"));

        let mut mismatched = good.clone();
        mismatched.scaler.target_mean += 1.0;
        mismatched.save(&path).unwrap_err();
        let msg = format!("{}", mismatched.validate().unwrap_err());
        assert!(msg.contains("does not match"), "{msg}");
    }

    #[test]
    fn wrong_input_width_is_rejected() {
        let mut checkpoint = toy_checkpoint();
        for member in &mut checkpoint.ensemble.members {
            member.arch.input_dim = 3;
        }
        let msg = format!("{}", checkpoint.validate().unwrap_err());
        assert!(msg.contains("expects 3 inputs"), "{msg}");
    }
}
