//! Saved-model files: the network's units and weights as JSON.

use std::path::Path;

use bbfnn::{BetaNetwork, BetaUnit};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitRecord {
    pub center: f64,
    pub width: f64,
    pub p: f64,
    pub q: f64,
    pub weight: f64,
}

/// JSON round trips of f64 use shortest round-trip decimals, so a loaded
/// model reproduces the saved network's outputs bit for bit.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub units: Vec<UnitRecord>,
}

impl ModelFile {
    pub fn from_network(net: &BetaNetwork) -> Self {
        let units = net
            .units()
            .iter()
            .zip(net.weights())
            .map(|(u, &w)| UnitRecord {
                center: u.center(),
                width: u.width(),
                p: u.shape_p(),
                q: u.shape_q(),
                weight: w,
            })
            .collect();
        ModelFile { units }
    }

    pub fn into_network(self) -> Result<BetaNetwork, CliError> {
        let mut units = Vec::with_capacity(self.units.len());
        let mut weights = Vec::with_capacity(self.units.len());
        for (i, r) in self.units.iter().enumerate() {
            let unit = BetaUnit::new(r.center, r.width, r.p, r.q)
                .map_err(|e| CliError::usage(format!("model units[{i}]: {e}")))?;
            if !r.weight.is_finite() {
                return Err(CliError::usage(format!(
                    "model units[{i}]: weight must be finite, got {}",
                    r.weight
                )));
            }
            units.push(unit);
            weights.push(r.weight);
        }
        BetaNetwork::new(units, weights).map_err(|e| CliError::usage(format!("model: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::runtime(format!("model serialization: {e}")))?;
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }
}
