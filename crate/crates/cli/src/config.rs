//! Experiment configuration: a flat JSON document whose fields mirror the
//! CLI flags. Unknown fields are schema violations.

use qlock_core::randomness::Seed;
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Uncertainty,
    WorstCase,
    Locking,
    Adversary,
    DataHiding,
    Bounds,
    Embedding,
    Moments,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Uncertainty => "uncertainty",
            ExperimentKind::WorstCase => "worst_case",
            ExperimentKind::Locking => "locking",
            ExperimentKind::Adversary => "adversary",
            ExperimentKind::DataHiding => "data_hiding",
            ExperimentKind::Bounds => "bounds",
            ExperimentKind::Embedding => "embedding",
            ExperimentKind::Moments => "moments",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SubsetKind {
    #[default]
    FullSphere,
    Separable,
}

fn default_t() -> usize {
    1
}
fn default_eps() -> f64 {
    0.1
}
fn default_trials() -> usize {
    400
}
fn default_n_effects() -> usize {
    200
}
fn default_restarts() -> usize {
    20
}
fn default_max_iters() -> usize {
    5000
}
fn default_support_size() -> usize {
    2
}
fn default_memory_cap_gib() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub d_a: usize,
    pub d_b: usize,
    #[serde(default = "default_t")]
    pub t: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed: Seed,
    #[serde(default)]
    pub subset: SubsetKind,
    #[serde(default = "default_n_effects")]
    pub n_effects: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_support_size")]
    pub support_size: usize,
    #[serde(default = "default_memory_cap_gib")]
    pub memory_cap_gib: f64,
    /// Serialize the ensemble members into the report (embedding experiment).
    #[serde(default)]
    pub export_map: bool,
    /// When set, experiments with per-trial values (uncertainty, moments)
    /// write them as CSV here and the report references the path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial_table_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

impl ExperimentConfig {
    pub fn d(&self) -> usize {
        self.d_a * self.d_b
    }

    /// Pre-flight ensemble memory estimate: `d^2 * t * 16` bytes.
    pub fn ensemble_bytes(&self) -> u64 {
        (self.d() as u64).pow(2) * self.t as u64 * 16
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_a == 0 || self.d_b == 0 || self.t == 0 {
            return Err(CliError::Config(
                "d_a, d_b and t must be positive".into(),
            ));
        }
        if self.trials < 2 {
            return Err(CliError::Config("trials must be at least 2".into()));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(CliError::Config(format!(
                "eps {} outside (0, 1]",
                self.eps
            )));
        }
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(CliError::Config(
                "restarts and max_iters must be positive".into(),
            ));
        }
        let needed_gib = self.ensemble_bytes() as f64 / (1u64 << 30) as f64;
        if needed_gib > self.memory_cap_gib {
            return Err(CliError::MemoryCap {
                needed_gib,
                cap_gib: self.memory_cap_gib,
            });
        }
        match self.experiment {
            ExperimentKind::Locking | ExperimentKind::Adversary | ExperimentKind::DataHiding => {
                if !self.d_a.is_power_of_two() {
                    return Err(CliError::Config(format!(
                        "{} experiment needs d_a = 2^n, got {}",
                        self.experiment.as_str(),
                        self.d_a
                    )));
                }
            }
            _ => {}
        }
        if self.experiment == ExperimentKind::DataHiding && self.t != 1 {
            return Err(CliError::Config(
                "data_hiding uses a single unitary (t = 1)".into(),
            ));
        }
        if self.experiment == ExperimentKind::Adversary {
            if self.support_size == 0 || self.support_size > self.d_a {
                return Err(CliError::Config(format!(
                    "support_size {} outside 1..={}",
                    self.support_size, self.d_a
                )));
            }
            let span = (self.t * self.support_size).saturating_sub(1) * self.d_b;
            if span >= self.d() {
                return Err(CliError::Config(format!(
                    "adversary needs (t*|S| - 1)*d_b < d, got {span} >= {}",
                    self.d()
                )));
            }
        }
        if self.experiment == ExperimentKind::Embedding && self.d_b < 2 {
            return Err(CliError::Config(
                "embedding distortion certification needs d_b >= 2".into(),
            ));
        }
        Ok(())
    }

    pub fn message_bits(&self) -> u32 {
        self.d_a.trailing_zeros()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
