//! Flat `key = value` sweep configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! n_values = 8000, 16000
//! dense_lo = 1e-6
//! dense_hi = 1e-3
//! dense_count = 16
//! coarse_count = 16
//! include_zero = true
//! include_one = true
//! extra_p = 0.01, 0.1
//! runs_per_point = 50
//! master_seed = 42
//! key_order = random
//! ```
//!
//! Values are layered: defaults, then the file, then environment variables,
//! then explicit `key=value` overrides. An environment variable may use the
//! key itself (`runs_per_point`) or its prefixed upper-case form
//! (`PAVL_RUNS_PER_POINT`); `PAVL_SEED` is an alias for `master_seed`.

use std::path::Path;

use pavl_core::{KeyOrder, SweepConfig};

use crate::error::{Error, Result};

pub const KEYS: [&str; 11] = [
    "n_values",
    "dense_lo",
    "dense_hi",
    "dense_count",
    "coarse_count",
    "include_zero",
    "include_one",
    "extra_p",
    "runs_per_point",
    "master_seed",
    "key_order",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

pub fn apply(config: &mut SweepConfig, key: &str, value: &str) -> Result<()> {
    let g = &mut config.p_grid;
    match key.trim() {
        "n_values" => config.n_values = parse_list(key, value)?,
        "dense_lo" => g.dense_lo = parse(key, value)?,
        "dense_hi" => g.dense_hi = parse(key, value)?,
        "dense_count" => g.dense_count = parse(key, value)?,
        "coarse_count" => g.coarse_count = parse(key, value)?,
        "include_zero" => g.include_zero = parse_bool(key, value)?,
        "include_one" => g.include_one = parse_bool(key, value)?,
        "extra_p" => g.extra = parse_list(key, value)?,
        "runs_per_point" => config.runs_per_point = parse(key, value)?,
        "master_seed" => config.master_seed = parse(key, value)?,
        "key_order" => config.key_order = value.parse::<KeyOrder>()?,
        other => return Err(Error::Config(format!("unknown key `{other}`"))),
    }
    Ok(())
}

/// Applies `key = value` lines on top of `config`.
pub fn apply_text(config: &mut SweepConfig, text: &str) -> Result<()> {
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        apply(config, key, value).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("line {}: {msg}", lineno + 1)),
            other => other,
        })?;
    }
    Ok(())
}

pub fn apply_env(config: &mut SweepConfig, env: impl Fn(&str) -> Option<String>) -> Result<()> {
    if let Some(seed) = env("PAVL_SEED") {
        apply(config, "master_seed", &seed)?;
    }
    for key in KEYS {
        let prefixed = format!("PAVL_{}", key.to_uppercase());
        for name in [prefixed.as_str(), key] {
            if let Some(v) = env(name) {
                apply(config, key, &v)?;
            }
        }
    }
    Ok(())
}

/// Overrides written as `key=value`.
pub fn apply_overrides(config: &mut SweepConfig, overrides: &[String]) -> Result<()> {
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{o}` is not key=value")))?;
        apply(config, k, v)?;
    }
    Ok(())
}

/// Reads a config file on top of the defaults, then the process
/// environment, then `overrides`, and validates the result.
pub fn load(path: &Path, overrides: &[String]) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut config = SweepConfig::default();
    apply_text(&mut config, &text)?;
    apply_env(&mut config, |k| std::env::var(k).ok())?;
    apply_overrides(&mut config, overrides)?;
    config.validate()?;
    Ok(config)
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

/// Canonical text form; parsing it back yields the same config.
pub fn to_text(config: &SweepConfig) -> String {
    let g = &config.p_grid;
    let mut s = String::new();
    let mut line = |k: &str, v: String| {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(&v);
        s.push('\n');
    };
    line("n_values", join(&config.n_values));
    line("dense_lo", g.dense_lo.to_string());
    line("dense_hi", g.dense_hi.to_string());
    line("dense_count", g.dense_count.to_string());
    line("coarse_count", g.coarse_count.to_string());
    line("include_zero", g.include_zero.to_string());
    line("include_one", g.include_one.to_string());
    line("extra_p", join(&g.extra));
    line("runs_per_point", config.runs_per_point.to_string());
    line("master_seed", config.master_seed.to_string());
    line("key_order", config.key_order.to_string());
    s
}
