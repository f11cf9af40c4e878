use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use crate::episode::EnvLabel;
use crate::error::{Error, Result};
use crate::policy::{PolicyConfig, TrainConfig};
use crate::railsim::WorldConfig;

/// Expert demonstration collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub episodes: usize,
    /// Fraction of episodes collected in environment A.
    pub env_mix: f64,
    /// Start X range in environment A.
    pub env_a_x: [f64; 2],
    /// Start X range in environment B.
    pub env_b_x: [f64; 2],
    /// Shelf levels used for demonstrations.
    pub z_indices: Vec<usize>,
    /// Start height of the carriage above the shelf surface.
    pub start_height: [f64; 2],
    /// Half-width of the bottle's lateral offset from the carriage.
    pub bottle_dx: f64,
    pub expert_jitter: f64,
    pub max_failure_rate: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            episodes: 300,
            env_mix: 0.5,
            env_a_x: [0.2, 0.9],
            env_b_x: [1.1, 1.8],
            z_indices: vec![1, 2, 3, 4],
            start_height: [0.115, 0.125],
            bottle_dx: 0.008,
            expert_jitter: 0.0015,
            max_failure_rate: 0.1,
        }
    }
}

/// What a safety halt is worth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HaltPolicy {
    /// Keep the stages reached before the halt.
    #[default]
    Freeze,
    /// A safety halt scores 0.
    Zero,
}

impl std::str::FromStr for HaltPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "freeze" => Ok(HaltPolicy::Freeze),
            "zero" => Ok(HaltPolicy::Zero),
            other => Err(Error::Config(format!("unknown halt policy {other:?} (expected freeze or zero)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub max_steps: usize,
    pub halt_policy: HaltPolicy,
    /// Evaluation environment. Anything but B is an ablation.
    pub env: EnvLabel,
    /// Stride used to subsample X values for the quick grid.
    pub quick_stride: usize,
    pub seeds: Vec<u64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            max_steps: 600,
            halt_policy: HaltPolicy::Freeze,
            env: EnvLabel::B,
            quick_stride: 4,
            seeds: vec![0, 1, 2],
        }
    }
}

/// Everything an end-to-end run depends on besides the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env_a: WorldConfig,
    pub env_b: WorldConfig,
    pub dataset: DatasetConfig,
    pub policy: PolicyConfig,
    pub training: TrainConfig,
    pub grid: GridSpec,
    pub eval: EvalConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env_a: WorldConfig::env_a(),
            env_b: WorldConfig::env_b(),
            dataset: DatasetConfig::default(),
            policy: PolicyConfig::default(),
            training: TrainConfig::default(),
            grid: GridSpec::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn world(&self, label: EnvLabel) -> &WorldConfig {
        match label {
            EnvLabel::A => &self.env_a,
            EnvLabel::B => &self.env_b,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.env_a.validate()?;
        self.env_b.validate()?;
        self.policy.validate()?;
        self.training.validate()?;
        let d = &self.dataset;
        if !(0.0..=1.0).contains(&d.env_mix) {
            return Err(Error::Config("env_mix must lie in [0, 1]".into()));
        }
        if d.z_indices.is_empty() || d.z_indices.iter().any(|&i| i >= self.env_b.shelf_z_levels.len()) {
            return Err(Error::Config("dataset z indices out of range".into()));
        }
        for range in [d.env_a_x, d.env_b_x, d.start_height] {
            if !(range[0] <= range[1]) {
                return Err(Error::Config(format!("empty range {range:?}")));
            }
        }
        if self.eval.quick_stride == 0 || self.eval.max_steps == 0 {
            return Err(Error::Config("quick_stride and max_steps must be at least 1".into()));
        }
        self.grid.validate(self.world(self.eval.env))
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::Malformed {
            line: e.line(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}
