//! Command-line front end for `sntail`.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod ledger;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use crate::args::Cli;
use crate::config::{default_workers, parse_ini, ConfigError, ExperimentConfig, OutputFormat};
use crate::error::CliError;

/// Merges the config file (if any) with the flags. Flags win.
pub fn resolve(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut map = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: PathBuf::from(path), source })?;
            parse_ini(&text)?
        }
        None => Default::default(),
    };
    let command = cli.command.name();
    if let Some(file_cmd) = map.get("command") {
        if file_cmd != command {
            return Err(ConfigError {
                violations: vec![format!("config file is for command `{file_cmd}` but `{command}` was requested")],
            }
            .into());
        }
    }
    map.insert("command".into(), command.into());
    map.extend(cli.overrides());
    Ok(ExperimentConfig::from_map(&map, default_workers())?)
}

fn render(outcome: &commands::Outcome, cfg: &ExperimentConfig) -> Result<String, CliError> {
    Ok(match cfg.format {
        OutputFormat::Csv => output::to_csv(&outcome.table, cfg)?,
        OutputFormat::Json => output::to_json(&outcome.table, cfg),
    })
}

/// Runs the tool and returns the process exit code.
pub fn run_from_args<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match run(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = resolve(cli)?;
    let outcome = commands::execute(&cfg)?;
    for w in &outcome.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let text = render(&outcome, &cfg)?;
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|source| CliError::Io { path: PathBuf::from(path), source })?
        }
        None => out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })?,
    }
    Ok(match &outcome.failure {
        Some(msg) => {
            let _ = writeln!(err, "error: internal consistency check failed: {msg}");
            1
        }
        None => 0,
    })
}
