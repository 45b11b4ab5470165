mod args;
mod commands;
mod config;
mod output;

use anyhow::Result;
use args::{Cli, Command};
use clap::Parser;
use mtl_core::ErrorCategory;
use output::{Manifest, Output};
use std::process::ExitCode;
use std::time::Instant;

/// Error raised by the front end itself, outside the library.
#[derive(Debug)]
pub struct CliError {
    pub category: ErrorCategory,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    CliError {
        category: ErrorCategory::Config,
        message: msg.into(),
    }
    .into()
}

fn category_of(err: &anyhow::Error) -> ErrorCategory {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<mtl_core::Error>() {
            return e.category();
        }
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return e.category;
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return ErrorCategory::Config;
        }
    }
    ErrorCategory::Internal
}

fn exit_code(c: ErrorCategory) -> u8 {
    match c {
        ErrorCategory::Config => 2,
        ErrorCategory::Resource => 3,
        ErrorCategory::Ambiguity => 4,
        ErrorCategory::Internal => 5,
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let t0 = Instant::now();
    let mut manifest = Manifest::new(&argv, cli.out.clone());
    let resolved = config::resolve(cli, &argv);
    let result = resolved.and_then(|run| {
        manifest.record(&run);
        if let Some(k) = run.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global()
                .map_err(|e| anyhow::anyhow!("thread pool: {e}"))?;
        }
        let out = dispatch(&run)?;
        output::write(&run, &out)?;
        Ok((run, out))
    });
    manifest.total_seconds = t0.elapsed().as_secs_f64();
    match result {
        Ok((run, out)) => {
            manifest.finish_ok(&out);
            if let Err(e) = manifest.emit(run.out.as_deref()) {
                eprintln!("error: {e:#}");
                return ExitCode::from(5);
            }
            if out.failed {
                return ExitCode::from(exit_code(ErrorCategory::Internal));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let category = category_of(&e);
            eprintln!("error ({}): {e:#}", output::category_name(category));
            manifest.finish_err(category, &format!("{e:#}"));
            let _ = manifest.emit(manifest.out_path().as_deref());
            ExitCode::from(exit_code(category))
        }
    }
}

fn dispatch(run: &config::Run) -> Result<Output> {
    match &run.command {
        Command::Sieve(a) => commands::sieve(run, a),
        Command::Sum(a) => commands::sum(run, a),
        Command::Exp { cmd } => commands::exp(run, cmd),
        Command::Goldbach { cmd } => commands::goldbach(run, cmd),
        Command::App(a) => commands::app(run, a),
        Command::Selftest(a) => commands::selftest(run, a),
    }
}
