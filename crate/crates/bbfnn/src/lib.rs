//! Beta basis function networks for 1-D function approximation, trained in
//! two levels: a variable-length genetic algorithm searches over hidden-layer
//! structures (how many units, where, what shape), and gradient descent then
//! refines the winning network's centers, widths, shape exponents, and
//! weights.
//!
//! The pieces compose bottom-up:
//!
//! - [`beta`]: the compactly supported Beta kernel, network forward pass,
//!   least-squares output weights, and the training-error measure.
//! - [`data`]: target functions, grid sampling, and CSV ingestion.
//! - [`evolution`]: the chromosome codec and the GA operators (selection,
//!   aligned crossover, mutation, neuron addition/elimination).
//! - [`gradient`]: per-sample parameter updates with a finite-difference
//!   checking oracle.
//! - [`hierarchy`]: the full two-phase run and multi-seed summaries.
//!
//! ```
//! use bbfnn::data::{builtin_function, sample_interleaved, sample_uniform};
//! use bbfnn::evolution::GaConfig;
//! use bbfnn::hierarchy::{run, RunConfig};
//!
//! let g2 = builtin_function("g2").unwrap();
//! let train = sample_uniform(&g2, -1.0, 1.0, 41, "train").unwrap();
//! let test = sample_interleaved(&g2, -1.0, 1.0, 25, "test").unwrap();
//! let cfg = RunConfig {
//!     ga: GaConfig { population_size: 10, generations: 3, seed: 7, ..GaConfig::default() },
//!     ..RunConfig::default()
//! };
//! let report = run(&cfg, &train, &test).unwrap();
//! assert!(report.n_units >= 5 && report.n_units <= 20);
//! ```

use thiserror::Error;

pub mod beta;
pub mod data;
pub mod evolution;
pub mod gradient;
pub mod hierarchy;

pub use beta::{solve_weights, training_error, BetaError, BetaNetwork, BetaUnit};
pub use data::{Dataset, Sample};
pub use evolution::{Chromosome, GaConfig, ParamBounds};
pub use gradient::{gradient_check, refine, GradientConfig};
pub use hierarchy::{compare_runs, run, RunConfig, RunReport};

/// A named invalid configuration field.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub(crate) fn new(field: &str, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
