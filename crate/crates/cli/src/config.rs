//! Experiment configuration: one JSON document per run.

use std::path::{Path, PathBuf};

use fogcache_core::sim::SimConfig;
use fogcache_core::{PolicyKind, SystemParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier every config must carry in its `schema` field.
pub const SCHEMA_ID: &str = "fogcache.experiment/v1";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    P,
    R,
    Mu,
    Alpha,
}

impl SweepVariable {
    pub fn apply(self, base: SystemParams, value: f64) -> SystemParams {
        match self {
            SweepVariable::P => SystemParams { p: value, ..base },
            SweepVariable::R => SystemParams { r: value, ..base },
            SweepVariable::Mu => SystemParams { mu: value, ..base },
            SweepVariable::Alpha => SystemParams { alpha: value, ..base },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

/// Simulation settings. Missing fields take the defaults below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub horizon: u64,
    pub replications: u32,
    pub seed: u64,
    /// `None` uses the simulator's default warmup rule.
    pub warmup: Option<u64>,
}

impl Default for SimSection {
    fn default() -> Self {
        Self { horizon: 100_000, replications: 10, seed: 0, warmup: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub base: SystemParams,
    pub policies: Vec<PolicyKind>,
    /// Without a sweep the base point is evaluated alone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    /// Output path prefix; files are named `{outputs}_{command}.csv`.
    pub outputs: String,
}

impl ExperimentConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != SCHEMA_ID {
            return Err(invalid("schema", format!("expected \"{SCHEMA_ID}\", found \"{}\"", self.schema)));
        }
        self.base.validate().map_err(|e| invalid("base", e.to_string()))?;
        if self.policies.is_empty() {
            return Err(invalid("policies", "at least one policy is required"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(invalid("sweep.values", "at least one value is required"));
            }
            for (i, &v) in sweep.values.iter().enumerate() {
                sweep
                    .variable
                    .apply(self.base, v)
                    .validate()
                    .map_err(|e| invalid(format!("sweep.values[{i}]"), e.to_string()))?;
            }
        }
        if let Some(sim) = &self.sim {
            if sim.horizon < 1 {
                return Err(invalid("sim.horizon", "must be at least 1"));
            }
            if sim.replications < 1 {
                return Err(invalid("sim.replications", "must be at least 1"));
            }
            if let Some(w) = sim.warmup {
                if w >= sim.horizon {
                    return Err(invalid("sim.warmup", "must be shorter than sim.horizon"));
                }
            }
        }
        if self.outputs.is_empty() {
            return Err(invalid("outputs", "an output prefix is required"));
        }
        Ok(())
    }

    /// Parameter tuples of the sweep, in sweep order.
    pub fn points(&self) -> Vec<SystemParams> {
        match &self.sweep {
            Some(s) => s.values.iter().map(|&v| s.variable.apply(self.base, v)).collect(),
            None => vec![self.base],
        }
    }

    pub fn sim_config(&self, params: SystemParams, policy: PolicyKind) -> Result<SimConfig, ConfigError> {
        let sim = self.sim.ok_or_else(|| invalid("sim", "the simulate command needs a sim section"))?;
        Ok(SimConfig {
            params,
            policy,
            horizon: sim.horizon,
            replications: sim.replications,
            master_seed: sim.seed,
            warmup_slots: sim.warmup,
        })
    }

    /// Applies the `--seed` override, creating a default sim section if needed.
    pub fn override_seed(&mut self, seed: u64) {
        self.sim.get_or_insert_with(SimSection::default).seed = seed;
    }

    pub fn output_path(&self, command: &str, extension: &str) -> PathBuf {
        PathBuf::from(format!("{}_{command}.{extension}", self.outputs))
    }
}
