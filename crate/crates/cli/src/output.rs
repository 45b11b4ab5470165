use crate::args::Format;
use crate::config::Run;
use anyhow::{Context, Result};
use mtl_core::ErrorCategory;
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

/// What a subcommand produced: CSV text and the same rows as JSON.
#[derive(Debug, Default)]
pub struct Output {
    pub csv: String,
    pub json: Value,
    /// The command ran but reported a failed check.
    pub failed: bool,
}

pub fn category_name(c: ErrorCategory) -> &'static str {
    match c {
        ErrorCategory::Config => "config",
        ErrorCategory::Resource => "resource",
        ErrorCategory::Ambiguity => "ambiguity",
        ErrorCategory::Internal => "internal",
    }
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn render(run: &Run, out: &Output) -> Result<String> {
    Ok(match run.format {
        Format::Csv => out.csv.clone(),
        Format::Json => {
            let doc = json!({
                "seed": run.seed,
                "command": run.command,
                "results": out.json,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    })
}

pub fn write(run: &Run, out: &Output) -> Result<()> {
    let text = render(run, out)?;
    match &run.out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Budgets {
    max_iterations: Option<u64>,
    max_memory_bytes: Option<u64>,
    sieve_cache_dir: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ErrorInfo {
    category: &'static str,
    message: String,
}

/// Touching rayon here would build its global pool before `--threads` applies.
fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Run record written next to every output.
#[derive(Debug, Serialize)]
pub struct Manifest {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    argv: Vec<String>,
    command: Option<Value>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    threads: usize,
    budgets: Option<Budgets>,
    format: Option<&'static str>,
    outputs: Vec<PathBuf>,
    rows: Option<usize>,
    pub total_seconds: f64,
    status: &'static str,
    error: Option<ErrorInfo>,
    #[serde(skip)]
    out: Option<PathBuf>,
}

impl Manifest {
    pub fn new(argv: &[String], out: Option<PathBuf>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            core_version: mtl_core::VERSION,
            argv: argv.to_vec(),
            command: None,
            config: None,
            seed: None,
            threads: default_threads(),
            budgets: None,
            format: None,
            outputs: Vec::new(),
            rows: None,
            total_seconds: 0.0,
            status: "running",
            error: None,
            out,
        }
    }

    pub fn record(&mut self, run: &Run) {
        self.command = serde_json::to_value(&run.command).ok();
        self.config = run.config_path.clone();
        self.seed = Some(run.seed);
        self.threads = run.threads.unwrap_or_else(default_threads);
        self.budgets = Some(Budgets {
            max_iterations: run.max_iterations,
            max_memory_bytes: run.budget_mem,
            sieve_cache_dir: run.sieve_cache.clone(),
        });
        self.format = Some(format_name(run.format));
        self.out = run.out.clone();
    }

    pub fn finish_ok(&mut self, out: &Output) {
        self.status = if out.failed { "failed" } else { "ok" };
        self.outputs = self.out.iter().cloned().collect();
        self.rows = Some(out.csv.lines().count().saturating_sub(1));
    }

    pub fn finish_err(&mut self, category: ErrorCategory, message: &str) {
        self.status = "error";
        self.error = Some(ErrorInfo {
            category: category_name(category),
            message: message.to_string(),
        });
    }

    pub fn out_path(&self) -> Option<PathBuf> {
        self.out.clone()
    }

    /// Writes `<out>.manifest.json`, or to stderr when output went to stdout.
    pub fn emit(&self, out: Option<&Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        match out {
            Some(p) => {
                let mut name = p.as_os_str().to_owned();
                name.push(".manifest.json");
                let path = PathBuf::from(name);
                std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                eprint!("{text}");
                Ok(())
            }
        }
    }
}
