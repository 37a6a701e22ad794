//! Optional TOML config file carrying the same keys as the flags.

use crate::CliError;
use serde::Deserialize;
use std::path::Path;

/// Every key is optional; explicit flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub qubit_cap: Option<usize>,
    pub max_evals: Option<u64>,
    pub shots: Option<u64>,
    pub lambda: Option<f64>,
    pub bbox_factor: Option<f64>,
    pub calibration: Option<f64>,
    pub depth: Option<usize>,
    pub timeout_secs: Option<f64>,
    pub jobs: Option<usize>,
    /// quality, feasibility, cost
    pub weights: Option<[f64; 3]>,
    pub decomposition: Option<String>,
    pub penalty: Option<String>,
    pub scaling: Option<String>,
    pub algorithm: Option<String>,
    pub optimizer: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new("io", format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))
    }
}

/// Flag, then config file, then default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}
