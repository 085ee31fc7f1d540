//! `rwvd`: command-line front end to `rwvd-core`.
//!
//! Every command prints (or writes with `--output`) either a JSON envelope
//! or a CSV table. Exit codes: `0` success, `1` runtime failure, `2` bad
//! arguments or configuration.

mod args;
mod commands;
pub mod sequence;
mod sweep;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;
use serde_json::{Map, Value};

pub use args::Cli;
use args::{Command, OutputArgs};

/// Environment variable bounding the worker pool.
pub const THREADS_ENV: &str = "RWVD_THREADS";

/// Failure carrying its exit code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<rwvd_core::Error> for CliError {
    fn from(e: rwvd_core::Error) -> Self {
        use rwvd_core::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidParameter { .. }
            | E::InvalidDistribution(_)
            | E::MalformedDimensions(_)
            | E::InsufficientRange { .. }
            | E::IndexOutOfDomain { .. }
            | E::SequenceExhausted { .. } => CliError::Config(msg),
            E::Overflow { .. } | E::NotMaterializable { .. } | E::Infeasible(_) | E::CapExceeded { .. } | E::Undefined => {
                CliError::Runtime(msg)
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// The JSON document every non-CSV command emits.
#[derive(Debug, Clone, Serialize)]
pub struct ResultEnvelope {
    pub command: String,
    pub version: String,
    /// Flags that reproduce the payload, keyed by long flag name.
    pub config: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
    pub payload: Value,
}

/// A finished command: the bytes to emit and where to put them.
pub(crate) struct Rendered {
    pub text: String,
    pub output: Option<PathBuf>,
}

/// Config echo: the serialized flags with absent options dropped.
pub(crate) fn config_echo<C: Serialize>(config: &C) -> CliResult<Map<String, Value>> {
    match serde_json::to_value(config).map_err(|e| CliError::Runtime(e.to_string()))? {
        Value::Object(m) => Ok(m.into_iter().filter(|(_, v)| !v.is_null()).collect()),
        _ => Ok(Map::new()),
    }
}

/// Rebuilds an argument vector from a config echo.
pub fn config_to_argv(command: &str, config: &Map<String, Value>) -> Vec<String> {
    let mut argv = vec!["rwvd".to_string(), command.to_string()];
    for (key, value) in config {
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => argv.push(format!("--{key}")),
            Value::String(s) => {
                argv.push(format!("--{key}"));
                argv.push(s.clone());
            }
            other => {
                argv.push(format!("--{key}"));
                argv.push(other.to_string());
            }
        }
    }
    argv
}

pub(crate) fn envelope<C: Serialize, P: Serialize>(
    command: &str,
    config: &C,
    out: &OutputArgs,
    started: Instant,
    payload: &P,
) -> CliResult<Rendered> {
    let env = ResultEnvelope {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config_echo(config)?,
        wall_time_secs: out.timing.then(|| started.elapsed().as_secs_f64()),
        payload: serde_json::to_value(payload).map_err(|e| CliError::Runtime(e.to_string()))?,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    Ok(Rendered {
        text,
        output: out.output.clone(),
    })
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Runtime(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(io)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

fn emit(rendered: Rendered) -> CliResult<()> {
    match rendered.output {
        Some(path) => write_atomic(&path, rendered.text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Runtime(format!("cannot write stdout: {e}")))
        }
    }
}

fn thread_count() -> CliResult<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Diagnostics go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = thread_count().and_then(|n| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
        pool.install(|| execute(cli.command, None))
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one parsed command; relative input paths resolve against `base`.
pub(crate) fn execute(command: Command, base: Option<&Path>) -> CliResult<()> {
    if let Command::Sweep(args) = command {
        return sweep::run_sweep(&args);
    }
    emit(commands::render(command, base)?)
}
