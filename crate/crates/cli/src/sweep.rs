//! Batch runs from a TOML file: one table per entry, a `command` key naming
//! the subcommand, every other key a long flag. An optional `output` key
//! names the entry's file inside the output directory.

use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;
use toml::Value;

use crate::args::{Cli, Command, SweepArgs};
use crate::{commands, write_atomic, CliError, CliResult};

#[derive(Debug, Serialize)]
struct EntryStatus {
    name: String,
    command: String,
    output: PathBuf,
    status: String,
}

fn flag_value(entry: &str, key: &str, v: &Value) -> CliResult<Option<String>> {
    Ok(Some(match v {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => f.to_string(),
        Value::Boolean(true) => return Ok(None),
        _ => {
            return Err(CliError::Config(format!(
                "[{entry}] key `{key}`: expected a string, number or `true`"
            )))
        }
    }))
}

/// The argument vector and output file of one entry.
fn entry_argv(name: &str, table: &toml::Table, out_dir: &Path) -> CliResult<(Vec<String>, PathBuf)> {
    let command = table
        .get("command")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::Config(format!("[{name}] needs a string `command` key")))?;
    if command == "sweep" {
        return Err(CliError::Config(format!("[{name}] cannot run a nested sweep")));
    }
    let csv = matches!(command, "phi" | "bands")
        && table.get("format").and_then(Value::as_str).unwrap_or("csv") == "csv";
    let output = match table.get("output") {
        Some(Value::String(s)) => out_dir.join(s),
        Some(_) => return Err(CliError::Config(format!("[{name}] key `output` must be a string"))),
        None => out_dir.join(format!("{name}.{}", if csv { "csv" } else { "json" })),
    };
    let mut argv = vec!["rwvd".to_string(), command.to_string()];
    for (key, value) in table {
        if key == "command" || key == "output" {
            continue;
        }
        if key == "timing" {
            return Err(CliError::Config(format!("[{name}] key `timing` is not allowed in a sweep")));
        }
        if matches!(value, Value::Boolean(false)) {
            continue;
        }
        argv.push(format!("--{key}"));
        if let Some(v) = flag_value(name, key, value)? {
            argv.push(v);
        }
    }
    argv.push("--output".to_string());
    argv.push(output.display().to_string());
    Ok((argv, output))
}

pub(crate) fn run_sweep(args: &SweepArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("--config {}: {e}", args.config.display())))?;
    let doc: toml::Table =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("--config {}: {e}", args.config.display())))?;
    let base = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let out_dir = args.out_dir.clone().unwrap_or_else(|| base.clone());
    if doc.is_empty() {
        return Err(CliError::Config("--config has no entries".into()));
    }

    let mut parsed: Vec<(String, Command, PathBuf)> = Vec::new();
    for (name, value) in &doc {
        let table = value
            .as_table()
            .ok_or_else(|| CliError::Config(format!("top-level key `{name}` must be a table")))?;
        let (argv, output) = entry_argv(name, table, &out_dir)?;
        let cli = Cli::try_parse_from(&argv).map_err(|e| {
            CliError::Config(format!("[{name}] {}", e.render().to_string().lines().next().unwrap_or("")))
        })?;
        parsed.push((name.clone(), cli.command, output));
    }

    let mut statuses = Vec::new();
    let mut failure: Option<CliError> = None;
    for (name, command, output) in parsed {
        let cmd_name = command.name().to_string();
        let status = match commands::render(command, Some(&base)).and_then(|r| {
            let path = r.output.clone().unwrap_or_else(|| output.clone());
            write_atomic(&path, r.text.as_bytes())
        }) {
            Ok(()) => "ok".to_string(),
            Err(e) => {
                eprintln!("error: [{name}] {e}");
                let msg = e.to_string();
                if failure.as_ref().map_or(true, |f| e.exit_code() > f.exit_code()) {
                    failure = Some(e);
                }
                format!("failed: {msg}")
            }
        };
        statuses.push(EntryStatus {
            name,
            command: cmd_name,
            output,
            status,
        });
    }
    let mut summary = serde_json::to_string_pretty(&statuses).map_err(|e| CliError::Runtime(e.to_string()))?;
    summary.push('\n');
    print!("{summary}");
    match failure {
        Some(CliError::Config(m)) => Err(CliError::Config(format!("sweep entry failed: {m}"))),
        Some(CliError::Runtime(m)) => Err(CliError::Runtime(format!("sweep entry failed: {m}"))),
        None => Ok(()),
    }
}
