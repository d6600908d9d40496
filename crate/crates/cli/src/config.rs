//! Run configuration: a single JSON document that fully determines a run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tarl_core::agents::{AgentConfig, TargetUpdate};
use tarl_core::envs::EnvName;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid field `{field}`: {message}")]
    Field { field: String, message: String },
}

impl ConfigError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Field { field: field.into(), message: message.into() }
    }

    /// Dotted path of the offending field, if any.
    pub fn field_name(&self) -> Option<&str> {
        match self {
            ConfigError::Field { field, .. } => Some(field),
            ConfigError::Read { .. } => None,
        }
    }
}

fn default_total_steps() -> u64 {
    50_000
}
fn default_eval_points() -> usize {
    100
}
fn default_eval_episodes() -> usize {
    5
}
fn default_buffer_capacity() -> usize {
    10_000
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub env: EnvName,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default = "default_total_steps")]
    pub total_steps: u64,
    #[serde(default = "default_eval_points")]
    pub eval_points: usize,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
    #[serde(default = "default_buffer_capacity")]
    pub buffer_capacity: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Defaults everywhere except the environment and seeds.
    pub fn new(env: EnvName, seeds: Vec<u64>) -> Self {
        RunConfig {
            env,
            seeds,
            agent: AgentConfig::default(),
            total_steps: default_total_steps(),
            eval_points: default_eval_points(),
            eval_episodes: default_eval_episodes(),
            buffer_capacity: default_buffer_capacity(),
            output_dir: default_output_dir(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            // Missing fields are reported against the parent; name the field itself.
            let msg = inner.to_string();
            let field = match msg.strip_prefix("missing field `").and_then(|r| r.split('`').next()) {
                Some(name) if path == "." => name.to_string(),
                Some(name) => format!("{path}.{name}"),
                None => path,
            };
            ConfigError::field(field, msg)
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.seeds.is_empty() {
            return Err(ConfigError::field("seeds", "at least one seed is required"));
        }
        if self.total_steps == 0 {
            return Err(ConfigError::field("total_steps", "must be positive"));
        }
        if self.eval_points == 0 {
            return Err(ConfigError::field("eval_points", "must be positive"));
        }
        if self.total_steps < self.eval_points as u64 {
            return Err(ConfigError::field("total_steps", format!("must be at least eval_points ({})", self.eval_points)));
        }
        if self.eval_episodes == 0 {
            return Err(ConfigError::field("eval_episodes", "must be positive"));
        }
        if self.buffer_capacity == 0 {
            return Err(ConfigError::field("buffer_capacity", "must be positive"));
        }
        let a = &self.agent;
        if a.batch_size == 0 {
            return Err(ConfigError::field("agent.batch_size", "must be at least 1"));
        }
        if a.tarl_enabled && a.oversample == 0 {
            return Err(ConfigError::field("agent.oversample", "must be at least 1 when tarl_enabled"));
        }
        if a.pool_size() > self.buffer_capacity {
            return Err(ConfigError::field("buffer_capacity", "smaller than one oversized batch"));
        }
        match a.target_update {
            TargetUpdate::Hard { period } if period == 0 => {
                return Err(ConfigError::field("agent.target_update.hard.period", "must be at least 1"));
            }
            TargetUpdate::Soft { tau } if !(tau > 0.0 && tau <= 1.0) => {
                return Err(ConfigError::field("agent.target_update.soft.tau", format!("must lie in (0, 1], got {tau}")));
            }
            _ => {}
        }
        if !(0.0..=1.0).contains(&a.gamma) {
            return Err(ConfigError::field("agent.gamma", "must lie in [0, 1]"));
        }
        for (name, v) in [("start", a.epsilon.start), ("end", a.epsilon.end), ("fraction", a.epsilon.fraction)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::field(format!("agent.epsilon.{name}"), "must lie in [0, 1]"));
            }
        }
        if a.hidden_sizes.contains(&0) {
            return Err(ConfigError::field("agent.hidden_sizes", "sizes must be positive"));
        }
        a.optimizer.validate().map_err(|e| ConfigError::field("agent.optimizer", e.to_string()))?;
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    RunConfig::from_json(&text)
}

pub fn save_config(config: &RunConfig, path: &Path) -> std::io::Result<()> {
    fs::write(path, config.to_json())
}
