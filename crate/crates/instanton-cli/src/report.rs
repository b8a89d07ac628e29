//! Result containers, error reports and deterministic file emission.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "instanton";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("{module}::{operation} failed: {source}")]
    Solver { module: &'static str, operation: &'static str, source: instanton::Error },
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver { .. } => 3,
            CliError::Output(_) => 4,
        }
    }

    pub fn report(&self) -> Value {
        let (kind, module, operation) = match self {
            CliError::Validation(_) => ("validation", None, None),
            CliError::Solver { module, operation, .. } => ("solver", Some(*module), Some(*operation)),
            CliError::Output(_) => ("output", None, None),
        };
        json!({
            "schema_version": SCHEMA_VERSION,
            "tool": { "name": TOOL_NAME, "version": TOOL_VERSION },
            "error": { "kind": kind, "module": module, "operation": operation, "message": self.to_string() },
        })
    }
}

/// Tags a library error with the module and operation that raised it.
pub trait At<T> {
    fn at(self, module: &'static str, operation: &'static str) -> Result<T, CliError>;
}

impl<T> At<T> for instanton::Result<T> {
    fn at(self, module: &'static str, operation: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Solver { module, operation, source })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub units: &'static str,
    pub method: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

/// A plot-ready table written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Series {
    pub fn numeric(name: &str, columns: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Series {
            name: name.to_string(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: rows.into_iter().map(|r| r.into_iter().map(Cell::Num).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub results: BTreeMap<String, Quantity>,
    pub details: BTreeMap<String, Value>,
    pub series: Vec<Series>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn put(&mut self, key: &str, value: f64, units: &'static str, method: &'static str) {
        self.results.insert(key.to_string(), Quantity { value, units, method });
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(key.to_string(), serde_json::to_value(value).expect("serializable detail"));
    }
}

pub fn format_number(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if (1e-4..1e6).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn config_json(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn results_document(cfg: &RunConfig, out: &Outcome) -> Value {
    let files: Vec<String> = if cfg.formats.contains(&Format::Csv) {
        out.series.iter().map(|s| format!("{}.csv", s.name)).collect()
    } else {
        Vec::new()
    };
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool": { "name": TOOL_NAME, "version": TOOL_VERSION },
        "command": cfg.command.name(),
        "config": config_json(cfg),
        "results": out.results,
        "details": out.details,
        "series_files": files,
        "warnings": out.warnings,
    })
}

fn csv_bytes(cfg: &RunConfig, s: &Series) -> Result<Vec<u8>, CliError> {
    let mut buf = format!(
        "# {TOOL_NAME} {TOOL_VERSION} schema_version={SCHEMA_VERSION} config={}\n",
        serde_json::to_string(&config_json(cfg)).expect("config serializes")
    )
    .into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let err = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(&s.columns).map_err(err)?;
        for row in &s.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Num(x) => format_number(*x),
                Cell::Text(t) => t.clone(),
                Cell::Empty => String::new(),
            }))
            .map_err(err)?;
        }
        w.flush().map_err(|e| CliError::Output(e.to_string()))?;
    }
    Ok(buf)
}

/// Renders every file in memory first so nothing is written on failure.
pub fn render(cfg: &RunConfig, out: &Outcome) -> Result<Vec<(String, Vec<u8>)>, CliError> {
    let mut files = Vec::new();
    if cfg.formats.contains(&Format::Json) {
        let mut text = serde_json::to_string_pretty(&results_document(cfg, out))
            .map_err(|e| CliError::Output(e.to_string()))?;
        text.push('\n');
        files.push(("results.json".to_string(), text.into_bytes()));
    }
    if cfg.formats.contains(&Format::Csv) {
        for s in &out.series {
            files.push((format!("{}.csv", s.name), csv_bytes(cfg, s)?));
        }
    }
    Ok(files)
}

pub fn write(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    for (name, bytes) in files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
