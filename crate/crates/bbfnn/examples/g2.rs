//! Trains on the built-in g2 benchmark and prints the run report.
//!
//! Usage: cargo run --release --example g2 [seed] [learning_rate] [max_iterations]
//!
//! The default step size is small on purpose: the refinement sweeps the
//! sorted grid sample by sample, and larger steps drift instead of converging.

use std::time::Instant;

use bbfnn::data::{g2_eval, sample_interleaved, sample_uniform};
use bbfnn::{run, RunConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1);
    let lr: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(2e-5);
    let maxiter: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(20_000);

    let train = sample_uniform(g2_eval, -1.0, 1.0, 201, "g2-train").unwrap();
    let test = sample_interleaved(g2_eval, -1.0, 1.0, 126, "g2-test").unwrap();

    let mut cfg = RunConfig::default();
    cfg.ga.seed = seed;
    cfg.grad.learning_rate = lr;
    cfg.grad.max_iterations = maxiter;

    let start = Instant::now();
    let report = run(&cfg, &train, &test).unwrap();
    let elapsed = start.elapsed();

    println!("seed                 {}", report.seed);
    println!("training error       {:.6}", report.training_error);
    println!(
        "generalization error {:.6}",
        report.generalization_error.unwrap()
    );
    println!("units                {}", report.n_units);
    println!("generations          {}", report.generations_run);
    println!("gradient iterations  {}", report.grad_iterations);
    println!("crossover fallbacks  {}", report.crossover_fallbacks);
    println!("wall time            {:.2}s", elapsed.as_secs_f64());
}
