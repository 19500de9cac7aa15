//! Merges config-file values with command-line flags.

use std::path::Path;

use bell_core::config::{load_config_value, TARGET_NAMES};
use bell_core::RunConfig;
use serde_json::{json, Map, Value};

use crate::{CliError, RunArgs};

pub const DEFAULT_OUT_DIR: &str = "bell-out";

/// `+1,-1,1,1` → `[1,-1,1,1]`.
fn parse_table(text: &str, field: &str) -> Result<Value, CliError> {
    let values: Result<Vec<i64>, _> = text.split(',').map(|v| v.trim().trim_start_matches('+').parse::<i64>()).collect();
    match values {
        Ok(v) if v.len() == 4 => Ok(json!(v)),
        _ => Err(CliError::config(format!("{field}: expected four comma-separated ±1 values, got \"{text}\""))),
    }
}

fn parse_tables(text: &str) -> Result<Value, CliError> {
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(text).map_err(|e| CliError::config(format!("strategy.tables: {e}")));
    }
    let tables: Result<Vec<Value>, CliError> =
        text.split(';').filter(|s| !s.trim().is_empty()).map(|t| parse_table(t, "strategy.tables")).collect();
    Ok(Value::Array(tables?))
}

fn parse_weights(text: &str) -> Result<Value, CliError> {
    if text.trim() == "uniform" {
        return Ok(json!(vec![1.0 / 16.0; 16]));
    }
    let weights: Result<Vec<f64>, _> = text.split(',').map(|w| w.trim().parse::<f64>()).collect();
    weights
        .map(|w| json!(w))
        .map_err(|_| CliError::config(format!("strategy.weights: cannot parse \"{text}\"")))
}

fn parse_target(text: &str) -> Result<Value, CliError> {
    if TARGET_NAMES.contains(&text) {
        return Ok(Value::String(text.to_string()));
    }
    let path = Path::new(text);
    if path.exists() {
        let body = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("strategy.target: cannot read {text}: {e}")))?;
        return serde_json::from_str(&body).map_err(|e| CliError::config(format!("strategy.target: {text}: {e}")));
    }
    Err(CliError::config(format!(
        "strategy.target: \"{text}\" is neither a known target ({}) nor a file",
        TARGET_NAMES.join(", ")
    )))
}

fn parse_angles(text: &str) -> Result<Value, CliError> {
    if text.contains(',') {
        let degrees: Result<Vec<f64>, _> = text.split(',').map(|d| d.trim().parse::<f64>()).collect();
        match degrees {
            Ok(d) if d.len() == 4 => Ok(json!(d)),
            _ => Err(CliError::config(format!("strategy.angles: expected four degree values, got \"{text}\""))),
        }
    } else {
        Ok(Value::String(text.to_string()))
    }
}

/// Resolves the run config: file values first, then flags on top.
pub fn resolve_run_config(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut root = match &args.config {
        Some(path) => load_config_value(path).map_err(CliError::config)?,
        None => Value::Object(Map::new()),
    };
    let obj = root
        .as_object_mut()
        .ok_or_else(|| CliError::config("config: top level must be a table/object"))?;

    if let Some(n) = args.n {
        obj.insert("n_trials".into(), json!(n));
    }
    if let Some(seed) = args.setting_seed {
        obj.insert("setting_seed".into(), json!(seed));
    }
    if let Some(seed) = args.strategy_seed {
        obj.insert("strategy_seed".into(), json!(seed));
    }
    if let Some(mode) = &args.mode {
        obj.insert("mode".into(), json!(mode));
    }
    if args.no_tables {
        obj.insert("log_tables".into(), json!(false));
    }
    let out = args
        .out
        .clone()
        .or_else(|| obj.get("output_dir").and_then(Value::as_str).map(Into::into))
        .unwrap_or_else(|| DEFAULT_OUT_DIR.into());
    obj.insert("output_dir".into(), json!(out));
    if !obj.contains_key("n_trials") {
        return Err(CliError::config("n_trials: missing (pass --n or set it in the config file)"));
    }

    let mut strategy = match obj.remove("strategy") {
        Some(Value::Object(s)) => s,
        Some(_) => return Err(CliError::config("strategy: must be a table/object")),
        None => Map::new(),
    };
    if let Some(name) = &args.strategy {
        if strategy.get("name").and_then(Value::as_str) != Some(name.as_str()) {
            strategy.clear();
        }
        strategy.insert("name".into(), json!(name));
    }
    if let Some(t) = &args.table {
        strategy.insert("table".into(), parse_table(t, "strategy.table")?);
    }
    if let Some(t) = &args.tables {
        strategy.insert("tables".into(), parse_tables(t)?);
    }
    if let Some(w) = &args.weights {
        strategy.insert("weights".into(), parse_weights(w)?);
    }
    if let Some(t) = &args.target {
        strategy.insert("target".into(), parse_target(t)?);
    }
    if let Some(a) = &args.angles {
        strategy.insert("angles".into(), parse_angles(a)?);
    }
    if !strategy.contains_key("name") {
        return Err(CliError::config("strategy: missing (pass --strategy or set it in the config file)"));
    }
    obj.insert("strategy".into(), Value::Object(strategy));

    RunConfig::from_value(root).map_err(CliError::config)
}
