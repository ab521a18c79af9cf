//! The four subcommand implementations and the files they emit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bbfnn::data::Dataset;
use bbfnn::evolution::{stream_rng, ValueRange};
use bbfnn::hierarchy::{RunReport, SummaryStats};
use bbfnn::{compare_runs, gradient_check, run, training_error, BetaNetwork, BetaUnit};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::model::ModelFile;
use crate::{CliError, Split};

/// RNG stream tag for gradcheck case generation; the trainer owns 0 and 1.
const GRADCHECK_TAG: u64 = 2;

#[derive(Serialize)]
struct Metrics {
    seed: u64,
    training_error: f64,
    generalization_error: Option<f64>,
    n_units: usize,
    generations_run: usize,
    grad_iterations: usize,
    crossover_fallbacks: u64,
}

impl Metrics {
    fn from_report(r: &RunReport) -> Self {
        Metrics {
            seed: r.seed,
            training_error: r.training_error,
            generalization_error: r.generalization_error,
            n_units: r.n_units,
            generations_run: r.generations_run,
            grad_iterations: r.grad_iterations,
            crossover_fallbacks: r.crossover_fallbacks,
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))
}

/// Quotes a CSV field if it contains a delimiter, quote, or newline.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn predictions_csv(net: &BetaNetwork, data: &Dataset) -> String {
    let mut text = String::from("x,y_true,y_pred\n");
    for s in data.iter() {
        let _ = writeln!(text, "{},{},{}", s.x, s.target, net.forward(s.x));
    }
    text
}

pub fn train(
    config_path: &Path,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let out_dir = out_override.unwrap_or_else(|| cfg.output_dir.clone());
    let (run_cfg, train, test) = cfg.to_run(config_path, seed_override)?;

    let report = run(&run_cfg, &train, &test).map_err(|e| CliError::runtime(e.to_string()))?;

    ensure_dir(&out_dir)?;
    let metrics = Metrics::from_report(&report);
    let mut metrics_json = serde_json::to_string_pretty(&metrics)
        .map_err(|e| CliError::runtime(format!("metrics serialization: {e}")))?;
    metrics_json.push('\n');
    write_text(&out_dir.join("metrics.json"), &metrics_json)?;

    ModelFile::from_network(&report.final_network).save(&out_dir.join("model.json"))?;

    let mut history = String::from("generation,best_fitness1,best_fitness2,mean_gene_count\n");
    for r in &report.history {
        let _ = writeln!(
            history,
            "{},{},{},{}",
            r.generation, r.best_fitness1, r.best_fitness2, r.mean_gene_count
        );
    }
    write_text(&out_dir.join("history.csv"), &history)?;

    write_text(
        &out_dir.join("predictions.csv"),
        &predictions_csv(&report.final_network, &test),
    )?;

    println!(
        "trained {} units in {} generations and {} gradient iterations",
        report.n_units, report.generations_run, report.grad_iterations
    );
    println!("training error {}", report.training_error);
    if let Some(g) = report.generalization_error {
        println!("generalization error {g}");
    }
    println!(
        "wrote metrics.json, model.json, history.csv, predictions.csv to {}",
        out_dir.display()
    );
    Ok(())
}

pub fn gradcheck(samples: usize, tolerance: f64, seed: u64) -> Result<(), CliError> {
    if samples == 0 {
        return Err(CliError::usage("samples: must be at least 1"));
    }
    if !tolerance.is_finite() {
        return Err(CliError::usage(format!(
            "tolerance: must be finite, got {tolerance}"
        )));
    }

    // Well-conditioned case ranges: wide enough supports and moderate
    // exponents keep the finite differences themselves trustworthy.
    let center = ValueRange { lo: -1.0, hi: 1.0 };
    let width = ValueRange { lo: 0.1, hi: 1.0 };
    let shape = ValueRange { lo: 0.5, hi: 4.0 };
    let weight = ValueRange { lo: -2.0, hi: 2.0 };
    let step = 1e-6;

    let mut rng = stream_rng(seed, 0, GRADCHECK_TAG);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let unit = BetaUnit::new(
            center.sample(&mut rng),
            width.sample(&mut rng),
            shape.sample(&mut rng),
            shape.sample(&mut rng),
        )
        .expect("sampled parameters are valid");
        let w = weight.sample(&mut rng);
        let (x0, x1) = unit.support();
        let u = ValueRange { lo: 0.05, hi: 0.95 }.sample(&mut rng);
        let x = x0 + u * (x1 - x0);
        let err = gradient_check(&unit, w, x, step)
            .map_err(|e| CliError::runtime(format!("gradient check: {e}")))?;
        worst = worst.max(err);
    }

    println!("worst relative error {worst:e} over {samples} cases");
    if worst < tolerance {
        Ok(())
    } else {
        Err(CliError::runtime(format!(
            "worst relative error {worst:e} is not below tolerance {tolerance:e}"
        )))
    }
}

pub fn eval(
    model_path: &Path,
    config_path: &Path,
    split: Split,
    out_dir: &Path,
) -> Result<(), CliError> {
    let net = ModelFile::load(model_path)?.into_network()?;
    let cfg = ExperimentConfig::load(config_path)?;
    let config_dir = config_path.parent().unwrap_or(Path::new("."));
    let (train, test) = cfg.dataset.build(config_dir)?;
    let data = match split {
        Split::Train => train,
        Split::Test => test,
    };
    if data.is_empty() {
        return Err(CliError::usage(format!(
            "dataset: the {} split is empty",
            match split {
                Split::Train => "train",
                Split::Test => "test",
            }
        )));
    }

    let err = training_error(&net, &data).map_err(|e| CliError::runtime(e.to_string()))?;
    println!("error {err}");

    ensure_dir(out_dir)?;
    write_text(
        &out_dir.join("predictions.csv"),
        &predictions_csv(&net, &data),
    )?;
    Ok(())
}

struct BenchRow {
    seed: u64,
    outcome: Result<(RunReport, f64), String>,
}

fn stats_of(values: &[f64]) -> SummaryStats {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    let median = if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    };
    SummaryStats {
        min: v[0],
        median,
        max: v[n - 1],
    }
}

pub fn bench(config_path: &Path, seeds: &[u64], out_override: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let out_dir = out_override.unwrap_or_else(|| cfg.output_dir.clone());
    let (base_cfg, train, test) = cfg.to_run(config_path, None)?;

    let rows: Vec<BenchRow> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let mut run_cfg = base_cfg.clone();
                run_cfg.ga.seed = seed;
                let (train, test) = (&train, &test);
                scope.spawn(move || {
                    let started = Instant::now();
                    let outcome = run(&run_cfg, train, test)
                        .map(|r| (r, started.elapsed().as_secs_f64()))
                        .map_err(|e| e.to_string());
                    BenchRow { seed, outcome }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bench worker panicked"))
            .collect()
    });

    let mut text = String::from("seed,training_error,generalization_error,n_units,wall_seconds,status\n");
    let mut ok_reports = Vec::new();
    let mut ok_walls = Vec::new();
    let mut failures = 0usize;
    for row in &rows {
        match &row.outcome {
            Ok((report, wall)) => {
                let gen = report
                    .generalization_error
                    .map(|g| g.to_string())
                    .unwrap_or_default();
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},ok",
                    row.seed, report.training_error, gen, report.n_units, wall
                );
                println!(
                    "seed {}: training error {:.6}, {} units, {:.2}s",
                    row.seed, report.training_error, report.n_units, wall
                );
                ok_reports.push(report.clone());
                ok_walls.push(*wall);
            }
            Err(msg) => {
                let _ = writeln!(text, "{},,,,,{}", row.seed, csv_field(msg));
                println!("seed {}: failed: {msg}", row.seed);
                failures += 1;
            }
        }
    }

    if !ok_reports.is_empty() {
        let summary = compare_runs(&ok_reports).map_err(|e| CliError::runtime(e.to_string()))?;
        let wall = stats_of(&ok_walls);
        let gen_cell = |pick: fn(&SummaryStats) -> f64| {
            summary
                .generalization_error
                .as_ref()
                .map(|s| pick(s).to_string())
                .unwrap_or_default()
        };
        for (name, pick) in [
            ("min", (|s| s.min) as fn(&SummaryStats) -> f64),
            ("median", |s| s.median),
            ("max", |s| s.max),
        ] {
            let _ = writeln!(
                text,
                "{},{},{},{},{},",
                name,
                pick(&summary.training_error),
                gen_cell(pick),
                pick(&summary.n_units),
                pick(&wall)
            );
        }
        println!(
            "median over {} runs: training error {:.6}, {} units",
            summary.runs, summary.training_error.median, summary.n_units.median
        );
    }

    ensure_dir(&out_dir)?;
    write_text(&out_dir.join("bench.csv"), &text)?;
    println!("wrote bench.csv to {}", out_dir.display());

    if failures > 0 {
        Err(CliError::runtime(format!(
            "{failures} of {} runs failed",
            rows.len()
        )))
    } else {
        Ok(())
    }
}
