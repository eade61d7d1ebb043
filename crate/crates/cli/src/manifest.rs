//! Run manifest: a JSON record of the resolved configuration, the dataset
//! provenance, and every artifact a `run` invocation produced, so any output
//! can be regenerated from the manifest alone.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::{runtime, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    /// "generated" or "csv".
    pub source: String,
    /// Path of the CSV actually used (written by the run when generated).
    pub path: String,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub strategy: String,
    pub seed: u64,
    pub curve_file: String,
    pub checkpoint_file: String,
    pub wall_ms: u64,
    pub final_train_size: usize,
    pub final_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub created_unix_s: u64,
    pub out_dir: String,
    pub config: ExperimentConfig,
    pub dataset: DatasetInfo,
    pub runs: Vec<RunEntry>,
}

impl RunManifest {
    pub fn new(out_dir: String, config: ExperimentConfig, dataset: DatasetInfo) -> RunManifest {
        RunManifest {
            tool: "surge-al".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            created_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            out_dir,
            config,
            dataset,
            runs: Vec::new(),
        }
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let mut json = serde_json::to_string_pretty(self)
            .map_err(|e| runtime(format!("cannot serialize manifest: {e}")))?;
        json.push('\n');
        fs::write(path, json).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let mut manifest = RunManifest::new(
            "out".into(),
            ExperimentConfig::default(),
            DatasetInfo {
                source: "generated".into(),
                path: "out/dataset.csv".into(),
                n_samples: 10,
            },
        );
        manifest.runs.push(RunEntry {
            strategy: "random".into(),
            seed: 3,
            curve_file: "curve_random_seed3.csv".into(),
            checkpoint_file: "checkpoint_random_seed3.json".into(),
            wall_ms: 1200,
            final_train_size: 1000,
            final_rmse: 9.5,
        });
        manifest.save(&path).unwrap();
        let loaded: RunManifest =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(manifest, loaded);
    }
}
