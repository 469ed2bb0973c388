//! Optional TOML run configuration. Every key can also be given as a flag;
//! flags win.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, Result};

/// Seed used when neither flag nor config gives one; always printed.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub target: Option<String>,
    pub gauge: Option<String>,
    pub mode: Option<String>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub policy: Option<String>,
    pub horizon: Option<usize>,
    pub until: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub grid_points: Option<usize>,
    pub significance: Option<f64>,
    pub divergence_intervals: Option<usize>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn load_opt(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
    }

    /// Values from `over` replace those in `self`.
    pub fn merged(self, over: RunConfig) -> RunConfig {
        RunConfig {
            target: over.target.or(self.target),
            gauge: over.gauge.or(self.gauge),
            mode: over.mode.or(self.mode),
            n: over.n.or(self.n),
            k: over.k.or(self.k),
            policy: over.policy.or(self.policy),
            horizon: over.horizon.or(self.horizon),
            until: over.until.or(self.until),
            seed: over.seed.or(self.seed),
            samples: over.samples.or(self.samples),
            grid_points: over.grid_points.or(self.grid_points),
            significance: over.significance.or(self.significance),
            divergence_intervals: over.divergence_intervals.or(self.divergence_intervals),
            output: over.output.or(self.output),
            report: over.report.or(self.report),
        }
    }

    pub fn require<'a, T>(&self, v: &'a Option<T>, key: &str) -> Result<&'a T> {
        v.as_ref().ok_or_else(|| {
            CliError::Config(format!("missing --{key} (or `{key}` in the config file)"))
        })
    }
}
