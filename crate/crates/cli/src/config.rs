//! Experiment configuration: a single TOML file with `[data]`, `[campaign]`,
//! `[model]` and `[train]` sections. Every field has a default, so a config
//! file only needs to state what it overrides; command-line flags override
//! the file in turn.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use surge_al_core::active_learning::{ALConfig, Strategy};
use surge_al_core::nnet::{Arch, TrainConfig};
use surge_al_core::pump_data::{GeneratorConfig, N_FEATURES};

use crate::{usage, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Output directory; overridden by `--out-dir`, falls back to the
    /// `SURGE_AL_OUT_DIR` environment variable and then `surge-al-out`.
    pub out_dir: Option<String>,
    pub data: DataSection,
    pub campaign: CampaignSection,
    pub model: ModelSection,
    pub train: TrainSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// Generate a synthetic dataset in memory (and save it next to the run).
    Generate,
    /// Load an existing CSV in the pump-sample schema.
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub source: DataSource,
    /// Required when `source = "csv"`.
    pub csv_path: Option<String>,
    pub n_samples: usize,
    /// Generator seed — independent of the campaign seeds so several
    /// campaigns can share one dataset.
    pub gen_seed: u64,
    pub noise_scale: f64,
    pub heteroscedastic: bool,
    pub tin_range: [f64; 2],
    pub pin_range: [f64; 2],
    pub n_range: [f64; 2],
    pub phi_range: [f64; 2],
}

impl Default for DataSection {
    fn default() -> DataSection {
        let g = GeneratorConfig::default();
        DataSection {
            source: DataSource::Generate,
            csv_path: None,
            n_samples: 5000,
            gen_seed: 42,
            noise_scale: g.noise_scale,
            heteroscedastic: g.heteroscedastic,
            tin_range: g.tin_range,
            pin_range: g.pin_range,
            n_range: g.n_range,
            phi_range: g.phi_range,
        }
    }
}

impl DataSection {
    pub fn generator_config(&self) -> GeneratorConfig {
        GeneratorConfig {
            n_samples: self.n_samples,
            seed: self.gen_seed,
            tin_range: self.tin_range,
            pin_range: self.pin_range,
            n_range: self.n_range,
            phi_range: self.phi_range,
            noise_scale: self.noise_scale,
            heteroscedastic: self.heteroscedastic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignSection {
    pub initial_train_size: usize,
    pub candidate_multiplier: usize,
    pub batch_k: usize,
    pub iterations: usize,
    pub total_budget: usize,
    pub test_fraction: f64,
    pub n_members: usize,
    pub warm_start: bool,
    pub strategies: Vec<String>,
    pub seeds: Vec<u64>,
}

impl Default for CampaignSection {
    fn default() -> CampaignSection {
        let c = ALConfig::default();
        CampaignSection {
            initial_train_size: c.initial_train_size,
            candidate_multiplier: c.candidate_multiplier,
            batch_k: c.batch_k,
            iterations: c.iterations,
            total_budget: c.total_budget,
            test_fraction: c.test_fraction,
            n_members: c.n_members,
            warm_start: c.warm_start,
            strategies: vec!["top_variance".into(), "random".into()],
            seeds: vec![0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub hidden_dims: Vec<usize>,
    pub tanh_scale: f64,
    pub variance_floor: f64,
}

impl Default for ModelSection {
    fn default() -> ModelSection {
        let a = Arch::default();
        ModelSection {
            hidden_dims: a.hidden_dims,
            tanh_scale: a.tanh_scale,
            variance_floor: a.variance_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub base_lr: f64,
    pub decay_factor: f64,
    pub decay_start_epoch: usize,
}

impl Default for TrainSection {
    fn default() -> TrainSection {
        let t = TrainConfig::default();
        TrainSection {
            epochs: t.epochs,
            batch_size: t.batch_size,
            base_lr: t.base_lr,
            decay_factor: t.decay_factor,
            decay_start_epoch: t.decay_start_epoch,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<ExperimentConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn arch(&self) -> Arch {
        Arch {
            input_dim: N_FEATURES,
            hidden_dims: self.model.hidden_dims.clone(),
            tanh_scale: self.model.tanh_scale,
            variance_floor: self.model.variance_floor,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            base_lr: self.train.base_lr,
            decay_factor: self.train.decay_factor,
            decay_start_epoch: self.train.decay_start_epoch,
            // Campaigns derive their own training streams from the campaign
            // seed; this value is never consulted there.
            seed: 0,
        }
    }

    /// The campaign configuration for one seed.
    pub fn al_config(&self, seed: u64) -> ALConfig {
        ALConfig {
            initial_train_size: self.campaign.initial_train_size,
            candidate_multiplier: self.campaign.candidate_multiplier,
            batch_k: self.campaign.batch_k,
            iterations: self.campaign.iterations,
            total_budget: self.campaign.total_budget,
            test_fraction: self.campaign.test_fraction,
            n_members: self.campaign.n_members,
            warm_start: self.campaign.warm_start,
            seed,
            arch: self.arch(),
            train_config: self.train_config(),
        }
    }

    pub fn strategies(&self) -> CliResult<Vec<Strategy>> {
        if self.campaign.strategies.is_empty() {
            return Err(usage("config lists no strategies"));
        }
        self.campaign
            .strategies
            .iter()
            .map(|s| s.parse::<Strategy>().map_err(usage))
            .collect()
    }
}
