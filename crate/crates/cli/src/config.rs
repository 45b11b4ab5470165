//! Merges command-line options with an optional JSON run configuration.
//!
//! ```json
//! {
//!   "command": "sum",
//!   "params": {"builtin": "plain_ternary", "n": 6, "m": 6, "strategy": "all"},
//!   "budgets": {"max_iterations": 1000000000, "max_memory_bytes": 1073741824,
//!               "sieve_cache_dir": "cache"},
//!   "output": {"path": "out.csv", "format": "csv"},
//!   "seed": 1,
//!   "threads": 4
//! }
//! ```
//!
//! `command` may hold several words (`"goldbach exponents"`). Each entry of
//! `params` becomes `--key value`; `true` becomes a bare flag and arrays
//! repeat the option.

use crate::args::{Cli, Command, Format};
use crate::config_error;
use anyhow::{Context, Result};
use clap::Parser;
use serde::Deserialize;
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub output: OutputConfig,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    pub max_iterations: Option<u64>,
    pub max_memory_bytes: Option<u64>,
    pub sieve_cache_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct Run {
    pub command: Command,
    pub threads: Option<usize>,
    pub seed: u64,
    pub budget_mem: Option<u64>,
    pub max_iterations: Option<u64>,
    pub sieve_cache: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub timings: bool,
    pub config_path: Option<PathBuf>,
}

fn scalar(v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => return Err(config_error(format!("unsupported parameter value {other}"))),
    })
}

fn params_to_argv(params: &Map<String, Value>) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (key, value) in params {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                for item in items {
                    out.push(flag.clone());
                    out.push(scalar(item)?);
                }
            }
            v => {
                out.push(flag);
                out.push(scalar(v)?);
            }
        }
    }
    Ok(out)
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(cfg)
}

fn positive(v: Option<u64>, name: &str) -> Result<Option<u64>> {
    if v == Some(0) {
        return Err(config_error(format!("{name} must be positive")));
    }
    Ok(v)
}

pub fn resolve(cli: Cli, argv: &[String]) -> Result<Run> {
    let cfg = match &cli.config {
        Some(p) => load(p)?,
        None => RunConfig::default(),
    };
    let command = match (cli.command, &cfg.command) {
        (Some(c), _) => c,
        (None, Some(words)) => {
            let mut args = vec![argv.first().cloned().unwrap_or_else(|| "mtl".into())];
            args.extend(words.split_whitespace().map(String::from));
            args.extend(params_to_argv(&cfg.params)?);
            Cli::try_parse_from(&args)
                .map_err(|e| config_error(format!("config command: {}", e.render())))?
                .command
                .ok_or_else(|| config_error("config command is incomplete"))?
        }
        (None, None) => {
            return Err(config_error(
                "no subcommand given; run `mtl --help` or supply one in --config",
            ))
        }
    };
    if cli.threads == Some(0) || cfg.threads == Some(0) {
        return Err(config_error("threads must be positive"));
    }
    Ok(Run {
        command,
        threads: cli.threads.or(cfg.threads),
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
        budget_mem: positive(cli.budget_mem.or(cfg.budgets.max_memory_bytes), "memory budget")?,
        max_iterations: positive(
            cli.max_iterations.or(cfg.budgets.max_iterations),
            "max_iterations",
        )?,
        sieve_cache: cli.sieve_cache.or(cfg.budgets.sieve_cache_dir),
        out: cli.out.or(cfg.output.path),
        format: cli.format.or(cfg.output.format).unwrap_or(Format::Csv),
        timings: cli.timings,
        config_path: cli.config,
    })
}
