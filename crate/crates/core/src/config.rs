//! Run configuration: which strategy, how many trials, which seeds.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::behavior::Behavior;
use crate::quantum::{quantum_behavior, AngleSet, PRESET_CHSH};
use crate::record::Mode;
use crate::strategy::{
    constant_strategy, greedy_memory_strategy, iid_random_strategy, nonlocal_cheat_strategy,
    quantum_sampler, time_periodic_strategy, Strategy,
};
use crate::table::CounterfactualTable;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid { field: field.into(), message: message.into() }
    }
}

/// Polarizer angles: a preset name or four degree values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnglesSpec {
    Preset(String),
    Degrees([f64; 4]),
}

impl Default for AnglesSpec {
    fn default() -> Self {
        AnglesSpec::Preset(PRESET_CHSH.to_string())
    }
}

impl AnglesSpec {
    pub fn resolve(&self) -> Result<AngleSet<f64>, ConfigError> {
        let parsed = match self {
            AnglesSpec::Preset(name) => AngleSet::parse(name),
            AnglesSpec::Degrees(d) => AngleSet::from_degrees(*d),
        };
        parsed.map_err(|e| ConfigError::invalid("strategy.angles", e.to_string()))
    }
}

/// Target of the nonlocal cheat: a named behavior or an inline `{"p": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Named(String),
    Inline(Value),
}

pub const TARGET_NAMES: [&str; 4] = ["quantum-preset", "uniform", "pr-box", "pr-box-aligned"];

impl TargetSpec {
    pub fn resolve(&self) -> Result<Behavior<f64>, ConfigError> {
        match self {
            TargetSpec::Named(name) => match name.as_str() {
                "quantum-preset" => Ok(quantum_behavior(&AngleSet::preset_chsh())),
                "uniform" => Ok(Behavior::uniform()),
                "pr-box" => Ok(Behavior::pr_box()),
                "pr-box-aligned" => Ok(Behavior::bell_aligned_pr_box()),
                other => Err(ConfigError::invalid(
                    "strategy.target",
                    format!("unknown target \"{other}\" (known: {})", TARGET_NAMES.join(", ")),
                )),
            },
            TargetSpec::Inline(value) => Behavior::from_json(value)
                .map_err(|e| ConfigError::invalid("strategy.target", e.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StrategySpec {
    Constant {
        table: CounterfactualTable,
    },
    IidRandom {
        weights: Vec<f64>,
    },
    Periodic {
        tables: Vec<CounterfactualTable>,
    },
    GreedyMemory,
    Cheat {
        target: TargetSpec,
    },
    Quantum {
        #[serde(default)]
        angles: AnglesSpec,
    },
}

impl StrategySpec {
    pub fn label(&self) -> &'static str {
        match self {
            StrategySpec::Constant { .. } => "constant",
            StrategySpec::IidRandom { .. } => "iid-random",
            StrategySpec::Periodic { .. } => "periodic",
            StrategySpec::GreedyMemory => "greedy-memory",
            StrategySpec::Cheat { .. } => "cheat",
            StrategySpec::Quantum { .. } => "quantum",
        }
    }

    /// Instantiates the strategy with its private seed.
    pub fn build(&self, strategy_seed: u64) -> Result<Strategy, ConfigError> {
        let strategy = match self {
            StrategySpec::Constant { table } => Strategy::Local(Box::new(constant_strategy(*table))),
            StrategySpec::IidRandom { weights } => {
                let weights: [f64; 16] = weights.as_slice().try_into().map_err(|_| {
                    ConfigError::invalid("strategy.weights", format!("expected 16 weights, got {}", weights.len()))
                })?;
                let s = iid_random_strategy(weights, strategy_seed)
                    .map_err(|e| ConfigError::invalid("strategy.weights", e.to_string()))?;
                Strategy::Local(Box::new(s))
            }
            StrategySpec::Periodic { tables } => {
                let s = time_periodic_strategy(tables.clone())
                    .map_err(|e| ConfigError::invalid("strategy.tables", e.to_string()))?;
                Strategy::Local(Box::new(s))
            }
            StrategySpec::GreedyMemory => Strategy::Local(Box::new(greedy_memory_strategy())),
            StrategySpec::Cheat { target } => {
                Strategy::Nonlocal(Box::new(nonlocal_cheat_strategy(target.resolve()?, strategy_seed)))
            }
            StrategySpec::Quantum { angles } => {
                Strategy::Nonlocal(Box::new(quantum_sampler(&angles.resolve()?, strategy_seed)))
            }
        };
        Ok(strategy)
    }
}

fn default_setting_seed() -> u64 {
    1
}

fn default_strategy_seed() -> u64 {
    2
}

fn default_mode() -> Mode {
    Mode::Sequential
}

pub fn default_azuma_thresholds() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.4142]
}

fn default_log_tables() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_trials: u64,
    #[serde(default = "default_setting_seed")]
    pub setting_seed: u64,
    #[serde(default = "default_strategy_seed")]
    pub strategy_seed: u64,
    pub strategy: StrategySpec,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Values of `t` at which `exp(-n t² / 32)` is reported.
    #[serde(default = "default_azuma_thresholds")]
    pub azuma_thresholds: Vec<f64>,
    /// Record each LHV trial's committed table in the log.
    #[serde(default = "default_log_tables")]
    pub log_tables: bool,
    /// Where the CLI writes its outputs; not part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(n_trials: u64, strategy: StrategySpec) -> Self {
        Self {
            n_trials,
            setting_seed: default_setting_seed(),
            strategy_seed: default_strategy_seed(),
            strategy,
            mode: default_mode(),
            azuma_thresholds: default_azuma_thresholds(),
            log_tables: default_log_tables(),
            output_dir: None,
        }
    }

    pub fn from_value(value: Value) -> Result<Self, ConfigError> {
        let config: RunConfig =
            serde_json::from_value(value).map_err(|e| ConfigError::invalid("config", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Checks every field and that the strategy can be built for the mode.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_trials == 0 {
            return Err(ConfigError::invalid("n_trials", "must be at least 1"));
        }
        if let Some(t) = self.azuma_thresholds.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(ConfigError::invalid("azuma_thresholds", format!("threshold {t} must be finite and >= 0")));
        }
        let strategy = self.strategy.build(self.strategy_seed)?;
        if self.mode == Mode::Galaxy && !strategy.memoryless() {
            return Err(ConfigError::invalid(
                "mode",
                format!("galaxy mode requires a memoryless strategy; \"{}\" uses history", strategy.name()),
            ));
        }
        Ok(())
    }

    /// Canonical JSON of everything that determines the run's output.
    pub fn canonical_json(&self) -> String {
        let mut hashed = self.clone();
        hashed.output_dir = None;
        serde_json::to_string(&hashed).expect("config serializes")
    }

    /// Hex SHA-256 of [`RunConfig::canonical_json`].
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// Reads a config file as a JSON value. `.json` files are parsed as JSON,
/// anything else as TOML key-value pairs.
pub fn load_config_value(path: &Path) -> Result<Value, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let parse_err = |message: String| ConfigError::Parse { path: path.to_path_buf(), message };
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))
    } else {
        let table: toml::Table = toml::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
        serde_json::to_value(table).map_err(|e| parse_err(e.to_string()))
    }
}
