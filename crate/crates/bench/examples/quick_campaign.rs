//! End-to-end campaign demo: generates a synthetic dataset, runs the
//! top-variance and random strategies from one seed, and prints the final
//! metrics side by side.
//!
//! Usage: cargo run --release -p surge-al-bench --example quick_campaign [seed]

use std::time::Instant;

use surge_al_core::active_learning::{al_loop, random_baseline_loop, ALConfig};
use surge_al_core::nnet::{Arch, TrainConfig};
use surge_al_core::pump_data::{generate_synthetic, GeneratorConfig};

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(values: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut out = vec![0.0; values.len()];
        for (rank, &idx) in order.iter().enumerate() {
            out[idx] = rank as f64;
        }
        out
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in rx.iter().zip(&ry) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx.sqrt() * syy.sqrt())
}

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);

    let dataset = generate_synthetic(&GeneratorConfig {
        n_samples: 5000,
        seed: 1000 + seed,
        ..Default::default()
    })
    .expect("generator config is valid");

    let config = ALConfig {
        initial_train_size: 50,
        batch_k: 50,
        iterations: 43,
        total_budget: 1000,
        n_members: 5,
        seed,
        arch: Arch::new(5, vec![64, 64, 64]),
        train_config: TrainConfig {
            epochs: 30,
            batch_size: 32,
            ..TrainConfig::default()
        },
        ..ALConfig::default()
    };

    let t0 = Instant::now();
    let al = al_loop(&dataset, &config).expect("top-variance campaign");
    let t_al = t0.elapsed();
    let t1 = Instant::now();
    let random = random_baseline_loop(&dataset, &config).expect("random campaign");
    let t_rand = t1.elapsed();

    println!(
        "seed {seed}: top_variance {:.1?}, random {:.1?}",
        t_al, t_rand
    );
    println!("iter  size  rmse(al)  rmse(rand)  poolvar(al)");
    for (a, r) in al.curve.records.iter().zip(&random.curve.records) {
        println!(
            "{:4}  {:4}  {:8.3}  {:10.3}  {:11.3}",
            a.iteration, a.train_size, a.test_rmse, r.test_rmse, a.mean_pool_variance
        );
    }

    // Heteroscedasticity recovery: pooled variance vs squared residual on test.
    let test: Vec<_> = al.state.test_idx.iter().map(|&i| dataset[i]).collect();
    let inputs: Vec<Vec<f64>> = test.iter().map(|s| al.scaler.apply(s).to_vec()).collect();
    let preds = al.ensemble.predict_pooled_batch(&inputs).expect("forward");
    let variances: Vec<f64> = preds
        .iter()
        .map(|p| al.scaler.invert_target_variance(p.variance))
        .collect();
    let sq_residuals: Vec<f64> = preds
        .iter()
        .zip(&test)
        .map(|(p, s)| {
            let r = al.scaler.invert_target(p.mean) - s.sd;
            r * r
        })
        .collect();
    println!(
        "spearman(variance, residual²) = {:.3}",
        spearman(&variances, &sq_residuals)
    );
    let last_al = al.curve.records.last().unwrap();
    let last_rand = random.curve.records.last().unwrap();
    println!(
        "final: rmse al {:.3} vs rand {:.3} | r2 {:.4} vs {:.4} | acc% {:.1} vs {:.1}",
        last_al.test_rmse,
        last_rand.test_rmse,
        last_al.test_r2,
        last_rand.test_r2,
        last_al.acceptance_accuracy,
        last_rand.acceptance_accuracy
    );
}
