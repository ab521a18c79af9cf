//! TOML experiment configs and their translation into run settings.
//!
//! Unknown keys are rejected everywhere: a typo in a GA probability should
//! fail loudly, not fall back to a default.

use std::path::{Path, PathBuf};

use bbfnn::data::{builtin_function, load_csv, sample_interleaved, sample_uniform, Dataset};
use bbfnn::evolution::{ParamBounds, ValueRange};
use bbfnn::{GaConfig, GradientConfig, RunConfig};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub ga: GaSection,
    #[serde(default)]
    pub grad: GradSection,
    #[serde(default = "default_ridge")]
    pub ridge: f64,
    #[serde(default = "default_stop_error")]
    pub stop_error: f64,
}

fn default_seed() -> u64 {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_ridge() -> f64 {
    RunConfig::default().ridge
}

fn default_stop_error() -> f64 {
    RunConfig::default().stop_error
}

/// Either a built-in target function sampled on a grid, or CSV files.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub builtin: Option<String>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub train_points: Option<usize>,
    pub test_points: Option<usize>,
    pub train_csv: Option<PathBuf>,
    pub test_csv: Option<PathBuf>,
}

impl DatasetSpec {
    /// Builds the train and test datasets. Relative CSV paths are resolved
    /// against the config file's directory. `test_points = 0` or a missing
    /// `test_csv` mean "no test set" (an empty dataset).
    pub fn build(&self, config_dir: &Path) -> Result<(Dataset, Dataset), CliError> {
        match (&self.builtin, &self.train_csv) {
            (Some(_), Some(_)) => Err(CliError::usage(
                "dataset: builtin and train_csv are mutually exclusive",
            )),
            (None, None) => Err(CliError::usage(
                "dataset: one of builtin or train_csv is required",
            )),
            (Some(name), None) => self.build_builtin(name),
            (None, Some(train_path)) => {
                for (key, value) in [
                    ("lo", self.lo.is_some()),
                    ("hi", self.hi.is_some()),
                    ("train_points", self.train_points.is_some()),
                    ("test_points", self.test_points.is_some()),
                ] {
                    if value {
                        return Err(CliError::usage(format!(
                            "dataset.{key}: only valid with a builtin function"
                        )));
                    }
                }
                let train = load_csv(config_dir.join(train_path))
                    .map_err(|e| CliError::usage(format!("dataset.train_csv: {e}")))?;
                let test = match &self.test_csv {
                    Some(p) => load_csv(config_dir.join(p))
                        .map_err(|e| CliError::usage(format!("dataset.test_csv: {e}")))?,
                    None => Dataset::new(Vec::new(), "test"),
                };
                Ok((train, test))
            }
        }
    }

    fn build_builtin(&self, name: &str) -> Result<(Dataset, Dataset), CliError> {
        if self.test_csv.is_some() {
            return Err(CliError::usage(
                "dataset.test_csv: only valid with train_csv",
            ));
        }
        let f = builtin_function(name)
            .map_err(|e| CliError::usage(format!("dataset.builtin: {e}")))?;
        let lo = self.lo.unwrap_or(-1.0);
        let hi = self.hi.unwrap_or(1.0);
        let train_points = self.train_points.unwrap_or(201);
        let test_points = self.test_points.unwrap_or(126);
        let train = sample_uniform(f, lo, hi, train_points, &format!("{name}-train"))
            .map_err(|e| CliError::usage(format!("dataset: {e}")))?;
        let test = if test_points == 0 {
            Dataset::new(Vec::new(), format!("{name}-test"))
        } else {
            sample_interleaved(f, lo, hi, test_points, &format!("{name}-test"))
                .map_err(|e| CliError::usage(format!("dataset: {e}")))?
        };
        Ok((train, test))
    }
}

/// `[lo, hi]` pairs for the four evolved parameters.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsSection {
    pub center: [f64; 2],
    pub width: [f64; 2],
    pub p: [f64; 2],
    pub q: [f64; 2],
}

impl Default for BoundsSection {
    fn default() -> Self {
        let b = ParamBounds::default();
        BoundsSection {
            center: [b.center_range.lo, b.center_range.hi],
            width: [b.width_range.lo, b.width_range.hi],
            p: [b.p_range.lo, b.p_range.hi],
            q: [b.q_range.lo, b.q_range.hi],
        }
    }
}

impl BoundsSection {
    fn to_bounds(self, section: &str) -> Result<ParamBounds, CliError> {
        let range = |name: &str, pair: [f64; 2]| {
            ValueRange::new(pair[0], pair[1])
                .map_err(|e| CliError::usage(format!("{section}.bounds.{name}: {e}")))
        };
        Ok(ParamBounds {
            center_range: range("center", self.center)?,
            width_range: range("width", self.width)?,
            p_range: range("p", self.p)?,
            q_range: range("q", self.q)?,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaSection {
    pub population_size: usize,
    pub generations: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub p_addition: f64,
    pub p_elimination: f64,
    pub crossover_retry_limit: usize,
    pub bounds: BoundsSection,
}

impl Default for GaSection {
    fn default() -> Self {
        let ga = GaConfig::default();
        GaSection {
            population_size: ga.population_size,
            generations: ga.generations,
            n_min: ga.n_min,
            n_max: ga.n_max,
            p_crossover: ga.p_crossover,
            p_mutation: ga.p_mutation,
            p_addition: ga.p_addition,
            p_elimination: ga.p_elimination,
            crossover_retry_limit: ga.crossover_retry_limit,
            bounds: BoundsSection::default(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradSection {
    pub learning_rate: f64,
    pub max_iterations: usize,
    /// Defaults to the experiment's stop_error.
    pub target_error: Option<f64>,
    /// Defaults to the GA bounds.
    pub bounds: Option<BoundsSection>,
}

impl Default for GradSection {
    fn default() -> Self {
        let grad = GradientConfig::default();
        GradSection {
            learning_rate: grad.learning_rate,
            max_iterations: grad.max_iterations,
            target_error: None,
            bounds: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }

    /// Validates everything and assembles the run settings plus datasets.
    pub fn to_run(
        &self,
        config_path: &Path,
        seed_override: Option<u64>,
    ) -> Result<(RunConfig, Dataset, Dataset), CliError> {
        let ga_bounds = self.ga.bounds.to_bounds("ga")?;
        let grad_bounds = match self.grad.bounds {
            Some(b) => b.to_bounds("grad")?,
            None => ga_bounds.clone(),
        };
        let cfg = RunConfig {
            ga: GaConfig {
                population_size: self.ga.population_size,
                generations: self.ga.generations,
                n_min: self.ga.n_min,
                n_max: self.ga.n_max,
                p_crossover: self.ga.p_crossover,
                p_mutation: self.ga.p_mutation,
                p_addition: self.ga.p_addition,
                p_elimination: self.ga.p_elimination,
                crossover_retry_limit: self.ga.crossover_retry_limit,
                bounds: ga_bounds,
                seed: seed_override.unwrap_or(self.seed),
            },
            grad: GradientConfig {
                learning_rate: self.grad.learning_rate,
                max_iterations: self.grad.max_iterations,
                target_error: self.grad.target_error.unwrap_or(self.stop_error),
                param_bounds: grad_bounds,
            },
            ridge: self.ridge,
            stop_error: self.stop_error,
        };
        cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
        let config_dir = config_path.parent().unwrap_or(Path::new("."));
        let (train, test) = self.dataset.build(config_dir)?;
        Ok((cfg, train, test))
    }
}
