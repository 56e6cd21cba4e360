//! Flat `key = value` configuration files.
//!
//! Every [`SolverParams`] field is a valid key, plus the run-level keys
//! `mode`, `theory`, `eps_feas`, `eps_inf`, `eps_opt`, `phase2_max_iter` and
//! `time_limit`. Blank lines and lines starting with `#` are ignored. Unknown
//! keys and out-of-range values are rejected with the offending field named.

use serde_json::{Map, Value};

use super::RunConfig;
use crate::error::{Result, SolverError};
use crate::phase1::{Mode, SolverParams};

fn config_error(field: &str, value: &str, interval: &'static str) -> SolverError {
    SolverError::Config {
        field: field.to_string(),
        value: value.to_string(),
        interval,
    }
}

fn parse_f64(field: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| config_error(field, value, "a floating-point number"))
}

fn parse_usize(field: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| config_error(field, value, "a nonnegative integer"))
}

fn json_scalar(value: &str) -> Value {
    if let Ok(i) = value.parse::<u64>() {
        return Value::from(i);
    }
    if let Ok(x) = value.parse::<f64>() {
        if let Some(n) = serde_json::Number::from_f64(x) {
            return Value::Number(n);
        }
    }
    Value::String(value.to_string())
}

/// Splits `text` into `(line number, key, value)` triples.
fn entries(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| SolverError::Io(format!("config line {}: expected `key = value`, got `{line}`", i + 1)))?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses a configuration text on top of the defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let defaults = serde_json::to_value(SolverParams::default())?;
    let Value::Object(mut params) = defaults else {
        unreachable!("SolverParams serializes to a map")
    };
    let known: Map<String, Value> = params.clone();
    for (_, key, value) in entries(text)? {
        match key.as_str() {
            "mode" => {
                cfg.mode = Mode::parse(&value).ok_or_else(|| config_error(&key, &value, "{full, v-only}"))?;
            }
            "theory" => {
                cfg.theory = value
                    .parse::<bool>()
                    .map_err(|_| config_error(&key, &value, "{true, false}"))?;
            }
            "eps_feas" => cfg.eps_feas = parse_f64(&key, &value)?,
            "eps_inf" => cfg.eps_inf = parse_f64(&key, &value)?,
            "eps_opt" => cfg.eps_opt = parse_f64(&key, &value)?,
            "phase2_max_iter" => cfg.phase2_max_iter = parse_usize(&key, &value)?,
            "time_limit" => {
                cfg.time_limit = if value == "none" {
                    None
                } else {
                    Some(parse_f64(&key, &value)?)
                };
            }
            _ if known.contains_key(&key) => {
                params.insert(key.clone(), json_scalar(&value));
                // Deserialize after every insertion so a type error names its field.
                serde_json::from_value::<SolverParams>(Value::Object(params.clone()))
                    .map_err(|_| config_error(&key, &value, "a value of the field's type"))?;
            }
            _ => return Err(config_error(&key, &value, "a known configuration key")),
        }
    }
    cfg.params = serde_json::from_value(Value::Object(params))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Emits every key with its current value; [`parse_config`] inverts it exactly.
pub fn emit_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    out.push_str("# solver parameters\n");
    if let Ok(Value::Object(map)) = serde_json::to_value(&cfg.params) {
        for (k, v) in map {
            let text = match v {
                Value::String(s) => s,
                Value::Number(n) => match n.as_u64() {
                    Some(i) if k == "max_iter" => i.to_string(),
                    _ => format!("{:e}", n.as_f64().unwrap_or(f64::NAN)),
                },
                other => other.to_string(),
            };
            out.push_str(&format!("{k} = {text}\n"));
        }
    }
    out.push_str("# run settings\n");
    out.push_str(&format!("mode = {}\n", cfg.mode.as_str()));
    out.push_str(&format!("theory = {}\n", cfg.theory));
    out.push_str(&format!("eps_feas = {:e}\n", cfg.eps_feas));
    out.push_str(&format!("eps_inf = {:e}\n", cfg.eps_inf));
    out.push_str(&format!("eps_opt = {:e}\n", cfg.eps_opt));
    out.push_str(&format!("phase2_max_iter = {}\n", cfg.phase2_max_iter));
    match cfg.time_limit {
        Some(s) => out.push_str(&format!("time_limit = {s:e}\n")),
        None => out.push_str("time_limit = none\n"),
    }
    out
}
