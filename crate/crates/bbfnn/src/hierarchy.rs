//! The two-level training loop: evolve a population of network structures to
//! a generation budget (or an early stop), then hand the champion to
//! gradient descent for parameter refinement.

use thiserror::Error;

use crate::beta::{solve_weights, training_error, BetaError, BetaNetwork};
use crate::data::Dataset;
use crate::evolution::{
    evaluate_population, next_generation, random_chromosome, stream_rng, Chromosome,
    EvolutionError, GaConfig, GaStats,
};
use crate::gradient::{refine, GradientConfig};
use crate::ConfigError;

const INIT_TAG: u64 = 0;
const BREED_TAG: u64 = 1;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Beta(#[from] BetaError),
    #[error("no reports to summarize")]
    NoReports,
}

/// Full experiment settings: the GA phase, the gradient phase, the
/// least-squares regularizer, and the error threshold that stops both
/// phases. The gradient phase runs with `target_error = stop_error`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub ga: GaConfig,
    pub grad: GradientConfig,
    pub ridge: f64,
    pub stop_error: f64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.ga.validate()?;
        self.grad.validate()?;
        if !(self.ridge.is_finite() && self.ridge >= 0.0) {
            return Err(ConfigError::new(
                "ridge",
                format!("must be non-negative and finite, got {}", self.ridge),
            ));
        }
        if !(self.stop_error.is_finite() && self.stop_error >= 0.0) {
            return Err(ConfigError::new(
                "stop_error",
                format!("must be non-negative and finite, got {}", self.stop_error),
            ));
        }
        Ok(())
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ga: GaConfig::default(),
            grad: GradientConfig::default(),
            ridge: 1e-10,
            stop_error: 0.01,
        }
    }
}

/// One evaluated generation: the population's lowest residual fitness, its
/// highest parsimony fitness, and the mean gene count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness1: f64,
    pub best_fitness2: f64,
    pub mean_gene_count: f64,
}

/// Everything a finished run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub final_network: BetaNetwork,
    /// half the sum of squared residuals over the training set
    pub training_error: f64,
    /// same measure over the test set; absent when no test set was given
    pub generalization_error: Option<f64>,
    pub n_units: usize,
    pub generations_run: usize,
    pub grad_iterations: usize,
    pub history: Vec<GenerationRecord>,
    pub seed: u64,
    pub crossover_fallbacks: u64,
}

/// Trains one network: random population, GA to the generation budget (with
/// an early exit as soon as any member's training error beats stop_error),
/// then least-squares weights for the best-scoring chromosome and gradient
/// refinement of the result. Deterministic given (config, datasets).
pub fn run(cfg: &RunConfig, train: &Dataset, test: &Dataset) -> Result<RunReport, RunError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(BetaError::EmptyDataset.into());
    }

    let seed = cfg.ga.seed;
    let mut init_rng = stream_rng(seed, 0, INIT_TAG);
    let mut population: Vec<Chromosome> = (0..cfg.ga.population_size)
        .map(|_| random_chromosome(&cfg.ga, &mut init_rng))
        .collect();

    let mut stats = GaStats::default();
    let mut history = Vec::new();
    let mut champion = population[0].clone();
    let mut generations_run = 0;

    for generation in 0..cfg.ga.generations {
        let scores = evaluate_population(&population, train, &cfg.ga, cfg.ridge)?;
        let mut best = 0;
        let mut min_f1 = f64::INFINITY;
        for (i, s) in scores.iter().enumerate() {
            if s.fitness2 > scores[best].fitness2 {
                best = i;
            }
            min_f1 = min_f1.min(s.fitness1);
        }
        let mean_gene_count = population.iter().map(Chromosome::gene_count).sum::<usize>()
            as f64
            / population.len() as f64;
        history.push(GenerationRecord {
            generation,
            best_fitness1: min_f1,
            best_fitness2: scores[best].fitness2,
            mean_gene_count,
        });
        generations_run = generation + 1;
        champion = population[best].clone();

        // training error is half the residual sum, so this is the step (ii)
        // stop test applied mid-search
        if min_f1 / 2.0 < cfg.stop_error {
            break;
        }
        if generation + 1 < cfg.ga.generations {
            let mut breed_rng = stream_rng(seed, generation as u64 + 1, BREED_TAG);
            population =
                next_generation(&population, train, &cfg.ga, cfg.ridge, &mut breed_rng, &mut stats)?;
        }
    }

    let units = champion.decode();
    let weights = solve_weights(&units, train, cfg.ridge)?;
    let ga_net = BetaNetwork::new(units, weights).map_err(BetaError::from)?;

    let refine_cfg = GradientConfig {
        target_error: cfg.stop_error,
        ..cfg.grad.clone()
    };
    let outcome = refine(&ga_net, train, &refine_cfg)?;
    let generalization_error = if test.is_empty() {
        None
    } else {
        Some(training_error(&outcome.network, test)?)
    };

    Ok(RunReport {
        n_units: outcome.network.len(),
        training_error: outcome.error,
        generalization_error,
        generations_run,
        grad_iterations: outcome.iterations,
        history,
        seed,
        crossover_fallbacks: stats.crossover_fallbacks,
        final_network: outcome.network,
    })
}

/// min/median/max of one reported quantity across runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

fn summarize(values: &mut Vec<f64>) -> SummaryStats {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    };
    SummaryStats {
        min: values[0],
        median,
        max: values[n - 1],
    }
}

/// Cross-seed summary of a batch of runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub runs: usize,
    pub training_error: SummaryStats,
    /// summarized over the reports that carry one
    pub generalization_error: Option<SummaryStats>,
    pub n_units: SummaryStats,
}

pub fn compare_runs(reports: &[RunReport]) -> Result<RunSummary, RunError> {
    if reports.is_empty() {
        return Err(RunError::NoReports);
    }
    let mut train: Vec<f64> = reports.iter().map(|r| r.training_error).collect();
    let mut units: Vec<f64> = reports.iter().map(|r| r.n_units as f64).collect();
    let mut general: Vec<f64> = reports
        .iter()
        .filter_map(|r| r.generalization_error)
        .collect();
    Ok(RunSummary {
        runs: reports.len(),
        training_error: summarize(&mut train),
        generalization_error: if general.is_empty() {
            None
        } else {
            Some(summarize(&mut general))
        },
        n_units: summarize(&mut units),
    })
}
