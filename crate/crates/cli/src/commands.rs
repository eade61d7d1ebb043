//! Implementations of the four subcommands.
//!
//! Error policy: anything detected before work starts (flag combinations,
//! config contents, infeasible campaign setups) is a usage error; anything
//! that fails during execution (I/O, training, corrupt artifacts) is a
//! runtime error.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use surge_al_core::active_learning::run_campaign;
use surge_al_core::metrics::MetricsOptions;
use surge_al_core::pump_data::{generate_synthetic, load_csv, save_csv, PumpSample};

use crate::checkpoint::Checkpoint;
use crate::config::{DataSource, ExperimentConfig};
use crate::curve::{read_curve, write_curve, CurveRow};
use crate::manifest::{DatasetInfo, RunEntry, RunManifest};
use crate::{
    runtime, usage, CliResult, CompareArgs, EvaluateArgs, GenerateArgs, RunArgs, SharedArgs,
    OUT_DIR_ENV,
};

fn load_config(path: Option<&Path>) -> CliResult<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

/// Precedence: `--out-dir` flag, config `out_dir`, `$SURGE_AL_OUT_DIR`, then
/// `./surge-al-out`.
fn resolve_out_dir(shared: &SharedArgs, config: &ExperimentConfig) -> PathBuf {
    shared
        .out_dir
        .clone()
        .or_else(|| config.out_dir.clone().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("surge-al-out"))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| runtime(format!("cannot create directory {}: {e}", dir.display())))
}

fn ensure_parent_dir(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => ensure_dir(parent),
        _ => Ok(()),
    }
}

pub fn generate(args: GenerateArgs) -> CliResult<()> {
    let config = load_config(args.shared.config.as_deref())?;
    let mut gen = config.data.generator_config();
    if let Some(n) = args.n {
        gen.n_samples = n;
    }
    if let Some(seed) = args.seed {
        gen.seed = seed;
    }
    if let Some(noise_scale) = args.noise_scale {
        gen.noise_scale = noise_scale;
    }
    if args.homoscedastic {
        gen.heteroscedastic = false;
    }
    gen.validate().map_err(usage)?;

    let out = match args.out {
        Some(path) => path,
        None => resolve_out_dir(&args.shared, &config).join("data.csv"),
    };
    ensure_parent_dir(&out)?;
    let samples = generate_synthetic(&gen).map_err(runtime)?;
    save_csv(&samples, &out).map_err(runtime)?;
    println!(
        "wrote {} samples (seed {}) to {}",
        samples.len(),
        gen.seed,
        out.display()
    );
    Ok(())
}

pub fn run(args: RunArgs) -> CliResult<()> {
    let mut config = load_config(args.shared.config.as_deref())?;
    if let Some(seeds) = args.seeds {
        config.campaign.seeds = seeds;
    } else if let Some(seed) = args.seed {
        config.campaign.seeds = vec![seed];
    }
    if let Some(strategies) = args.strategies {
        config.campaign.strategies = strategies;
    }
    if let Some(data) = &args.data {
        config.data.source = DataSource::Csv;
        config.data.csv_path = Some(data.display().to_string());
    }

    let strategies = config.strategies()?;
    if config.campaign.seeds.is_empty() {
        return Err(usage("no campaign seeds configured"));
    }

    let out_dir = resolve_out_dir(&args.shared, &config);
    ensure_dir(&out_dir)?;

    let (dataset, dataset_info) = match config.data.source {
        DataSource::Csv => {
            let path = config
                .data
                .csv_path
                .clone()
                .ok_or_else(|| usage("data.source is \"csv\" but no csv_path is set"))?;
            let samples = load_csv(&path).map_err(runtime)?;
            let info = DatasetInfo {
                source: "csv".into(),
                path,
                n_samples: samples.len(),
            };
            (samples, info)
        }
        DataSource::Generate => {
            let gen = config.data.generator_config();
            gen.validate().map_err(usage)?;
            let samples = generate_synthetic(&gen).map_err(runtime)?;
            let path = out_dir.join("dataset.csv");
            save_csv(&samples, &path).map_err(runtime)?;
            let info = DatasetInfo {
                source: "generated".into(),
                path: path.display().to_string(),
                n_samples: samples.len(),
            };
            (samples, info)
        }
    };

    // Campaign feasibility does not depend on the seed, so one check covers
    // every planned run; nothing trains if the setup cannot finish.
    let first_seed = config.campaign.seeds[0];
    config
        .al_config(first_seed)
        .validate_for(dataset.len())
        .map_err(|e| usage(format!("infeasible campaign: {e}")))?;

    let mut manifest =
        RunManifest::new(out_dir.display().to_string(), config.clone(), dataset_info);
    for &strategy in &strategies {
        for &seed in &config.campaign.seeds {
            let al = config.al_config(seed);
            let started = Instant::now();
            let outcome = run_campaign(&dataset, &al, strategy, |_, _| {}).map_err(runtime)?;
            let wall_ms = started.elapsed().as_millis() as u64;

            let curve_file = format!("curve_{strategy}_seed{seed}.csv");
            write_curve(&outcome.curve, &out_dir.join(&curve_file))?;
            let checkpoint_file = format!("checkpoint_{strategy}_seed{seed}.json");
            Checkpoint::new(strategy.to_string(), seed, outcome.ensemble, outcome.scaler)
                .save(&out_dir.join(&checkpoint_file))?;

            let last = outcome
                .curve
                .records
                .last()
                .expect("campaigns record the initial fit");
            println!(
                "{strategy} seed {seed}: {} iterations, final rmse {:.4} at train size {} ({:.1} s)",
                outcome.curve.records.len() - 1,
                last.test_rmse,
                last.train_size,
                wall_ms as f64 / 1000.0,
            );
            manifest.runs.push(RunEntry {
                strategy: strategy.to_string(),
                seed,
                curve_file,
                checkpoint_file,
                wall_ms,
                final_train_size: last.train_size,
                final_rmse: last.test_rmse,
            });
        }
    }

    let manifest_path = out_dir.join("manifest.json");
    manifest.save(&manifest_path)?;
    println!("manifest: {}", manifest_path.display());
    Ok(())
}

/// Evaluation artifact: deliberately timestamp-free so that re-evaluating the
/// same checkpoint on the same data writes an identical file.
#[derive(Serialize)]
struct EvaluationArtifact<'a> {
    checkpoint: String,
    data: String,
    strategy: &'a str,
    campaign_seed: u64,
    report: &'a surge_al_core::metrics::MetricsReport,
}

pub fn evaluate(args: EvaluateArgs) -> CliResult<()> {
    if args.threshold_pct.is_nan() || args.threshold_pct < 0.0 {
        return Err(usage(format!(
            "--threshold-pct must be non-negative, got {}",
            args.threshold_pct
        )));
    }
    if args.mape_floor.is_nan() || args.mape_floor <= 0.0 {
        return Err(usage(format!(
            "--mape-floor must be positive, got {}",
            args.mape_floor
        )));
    }
    let config = load_config(args.shared.config.as_deref())?;

    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let samples: Vec<PumpSample> = load_csv(&args.data).map_err(runtime)?;
    if samples.is_empty() {
        return Err(runtime(format!(
            "dataset {} has no rows",
            args.data.display()
        )));
    }

    let options = MetricsOptions {
        threshold_pct: args.threshold_pct,
        mape_floor: args.mape_floor,
    };
    let report = surge_al_core::active_learning::evaluate_ensemble(
        &checkpoint.ensemble,
        &checkpoint.scaler,
        &samples,
        &options,
    )
    .map_err(runtime)?;

    println!(
        "checkpoint {} ({}, campaign seed {}) on {} rows from {}",
        args.checkpoint.display(),
        checkpoint.strategy,
        checkpoint.campaign_seed,
        report.n,
        args.data.display(),
    );
    println!("  r2              {:>12.6}", report.r2);
    println!("  rmse            {:>12.6}", report.rmse);
    println!("  max_error       {:>12.6}", report.max_error);
    println!("  mape_pct        {:>12.6}", report.mape_pct);
    println!(
        "  acceptance_pct  {:>12.6}  (within {}% relative)",
        report.acceptance_accuracy_pct, report.threshold_pct
    );

    let out = match args.out {
        Some(path) => path,
        None => resolve_out_dir(&args.shared, &config).join("evaluation.json"),
    };
    ensure_parent_dir(&out)?;
    let artifact = EvaluationArtifact {
        checkpoint: args.checkpoint.display().to_string(),
        data: args.data.display().to_string(),
        strategy: &checkpoint.strategy,
        campaign_seed: checkpoint.campaign_seed,
        report: &report,
    };
    let mut json = serde_json::to_string_pretty(&artifact)
        .map_err(|e| runtime(format!("cannot serialize report: {e}")))?;
    json.push('\n');
    fs::write(&out, json).map_err(|e| runtime(format!("cannot write {}: {e}", out.display())))?;
    println!("report: {}", out.display());
    Ok(())
}

struct GroupStat {
    n: usize,
    mean: f64,
    std: f64,
}

/// Mean and population standard deviation of each group's RMSE at one budget.
fn group_stat(values: &[f64]) -> GroupStat {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    GroupStat {
        n,
        mean,
        std: var.sqrt(),
    }
}

fn read_group(files: &[PathBuf]) -> CliResult<Vec<(String, Vec<CurveRow>)>> {
    files
        .iter()
        .map(|path| {
            let rows = read_curve(path)?;
            if rows.is_empty() {
                return Err(runtime(format!("curve {} has no rows", path.display())));
            }
            Ok((path.display().to_string(), rows))
        })
        .collect()
}

fn rmse_at(rows: &[CurveRow], train_size: usize) -> Option<f64> {
    rows.iter()
        .find(|r| r.train_size == train_size)
        .map(|r| r.rmse)
}

pub const COMPARISON_HEADER: &str = "train_size,al_n,al_rmse_mean,al_rmse_std,baseline_n,\
                                     baseline_rmse_mean,baseline_rmse_std,rmse_delta";

pub fn compare(args: CompareArgs) -> CliResult<()> {
    let config = load_config(args.shared.config.as_deref())?;
    let al_group = read_group(&args.al)?;
    let baseline_group = read_group(&args.baseline)?;

    // Budgets are the train sizes present in every file of both groups; per
    // curve the grid is strictly increasing, so the intersection stays sorted.
    let mut budgets: Vec<usize> = al_group[0].1.iter().map(|r| r.train_size).collect();
    for (_, rows) in al_group.iter().chain(baseline_group.iter()) {
        budgets.retain(|b| rows.iter().any(|r| r.train_size == *b));
    }
    if budgets.is_empty() {
        let mut msg = String::from("the curve files share no train-size budgets:");
        for (name, rows) in al_group.iter().chain(baseline_group.iter()) {
            let grid: Vec<usize> = rows.iter().map(|r| r.train_size).collect();
            msg.push_str(&format!("\n  {name}: {grid:?}"));
        }
        return Err(usage(msg));
    }

    let mut csv = String::from(COMPARISON_HEADER);
    csv.push('\n');
    println!(
        "{:>10}  {:>22}  {:>22}  {:>10}",
        "train_size", "al rmse (mean±std)", "base rmse (mean±std)", "delta"
    );
    let mut final_delta = 0.0;
    for &budget in &budgets {
        let collect = |group: &[(String, Vec<CurveRow>)]| -> Vec<f64> {
            group
                .iter()
                .map(|(_, rows)| rmse_at(rows, budget).expect("budget drawn from intersection"))
                .collect()
        };
        let al = group_stat(&collect(&al_group));
        let baseline = group_stat(&collect(&baseline_group));
        let delta = al.mean - baseline.mean;
        final_delta = delta;
        csv.push_str(&format!(
            "{budget},{},{},{},{},{},{},{}\n",
            al.n, al.mean, al.std, baseline.n, baseline.mean, baseline.std, delta
        ));
        println!(
            "{budget:>10}  {:>13.4} ±{:>6.4}  {:>13.4} ±{:>6.4}  {delta:>+10.4}",
            al.mean, al.std, baseline.mean, baseline.std
        );
    }

    let out = match args.out {
        Some(path) => path,
        None => resolve_out_dir(&args.shared, &config).join("comparison.csv"),
    };
    ensure_parent_dir(&out)?;
    fs::write(&out, csv).map_err(|e| runtime(format!("cannot write {}: {e}", out.display())))?;

    let last_budget = *budgets.last().expect("budgets checked non-empty");
    println!(
        "at final shared budget {last_budget}: rmse_delta (al - baseline) = {final_delta:+.4}"
    );
    println!("comparison: {}", out.display());
    Ok(())
}
