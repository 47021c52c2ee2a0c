use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub kkt_residual: Option<f64>,
    pub conjugacy_gaps: Vec<f64>,
    pub converged: bool,
    pub iterations: Option<usize>,
}

/// JSON document written by every fitting task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDoc {
    pub task: String,
    pub config_echo: RunConfig,
    /// Named coefficient vectors; the names depend on the task.
    pub coefficients: BTreeMap<String, Vec<f64>>,
    pub support: Vec<usize>,
    /// Knot positions in input units (spline fits only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<f64>>,
    /// Duality-map images, one per input row (`dual` only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub maps: Vec<Vec<f64>>,
    pub objective: Option<f64>,
    pub certificates: Certificates,
    pub timing_ms: Option<f64>,
}

impl OutputDoc {
    pub fn coefficient(&self, name: &str) -> CliResult<&[f64]> {
        self.coefficients
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| CliError::config(format!("output document has no coefficient vector {name:?}")))
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::io(path, e))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> CliResult<OutputDoc> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
    }
}
