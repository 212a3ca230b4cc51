//! Command-line front end for `krext-core`.
//!
//! Every subcommand loads its inputs, calls one library operation and prints
//! the result as JSON (or CSV with `--format csv`). Floating-point numbers are
//! rounded to 12 significant digits on output.

mod args;
mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::Value;

use krext_core::{Error, Tolerances};

pub use args::{Cli, Command, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRACT: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Core(Error::Malformed(_)) | Failure::Data { .. } => EXIT_DATA,
            Failure::Core(Error::Contract(_)) => EXIT_CONTRACT,
            Failure::Core(Error::Solver(_)) => EXIT_SOLVER,
            Failure::Read { .. } => EXIT_NO_INPUT,
            Failure::Write { .. } => EXIT_IO,
            Failure::Usage(_) => EXIT_USAGE,
        }
    }
}

/// Output of a command: a JSON document plus, for tabular commands, CSV rows.
pub struct Output {
    pub json: Value,
    /// Column names and rows; `None` means CSV flattens the JSON object.
    pub table: Option<(Vec<&'static str>, Vec<Vec<Value>>)>,
}

impl Output {
    pub fn json(json: Value) -> Self {
        Self { json, table: None }
    }
}

/// Resolved run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tol: Tolerances,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn tolerance(flag: Option<f64>) -> Result<f64, Failure> {
    let (value, source) = match flag {
        Some(t) => (t, "--tol".to_string()),
        None => match std::env::var("KREXT_TOL") {
            Ok(s) => (
                s.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("KREXT_TOL={s:?} is not a number")))?,
                "KREXT_TOL".to_string(),
            ),
            Err(_) => return Ok(1e-9),
        },
    };
    if !(value.is_finite() && value > 0.0) {
        return Err(Failure::Usage(format!("{source} must be positive and finite, got {value}")));
    }
    Ok(value)
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("krext: {f}");
            f.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let cfg = RunConfig {
        tol: Tolerances::uniform(tolerance(cli.global.tol)?),
        seed: cli.global.seed,
        format: cli.global.format,
        out: cli.global.out,
    };
    let (output, status) = commands::dispatch(&cli.command, &cfg)?;
    let text = render(output, cfg.format)?;
    emit(&text, cfg.out.as_deref())?;
    status.map_or(Ok(()), Err)
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Applies [`round12`] to every non-integer number in a JSON value.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            serde_json::Number::from_f64(round12(n.as_f64().expect("f64"))).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render(output: Output, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&round_value(output.json)).expect("JSON values serialize");
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let (header, rows): (Vec<String>, Vec<Vec<Value>>) = match output.table {
                Some((h, rows)) => (h.into_iter().map(String::from).collect(), rows),
                None => match round_value(output.json) {
                    Value::Object(o) => {
                        let (h, row) = o.into_iter().unzip();
                        (h, vec![row])
                    }
                    other => (vec!["value".into()], vec![vec![other]]),
                },
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Failure::Usage(format!("CSV encoding failed: {e}"));
            w.write_record(&header).map_err(io)?;
            for row in rows {
                w.write_record(row.into_iter().map(|v| csv_cell(&round_value(v)))).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| Failure::Usage(format!("CSV encoding failed: {e}")))?;
            Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    let Some(path) = out else {
        print!("{text}");
        return Ok(());
    };
    let werr = |source| Failure::Write { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(werr)?;
    tmp.write_all(text.as_bytes()).map_err(werr)?;
    tmp.persist(path).map_err(|e| werr(e.error))?;
    Ok(())
}
