use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Map, Value};

use metric_distortion::ExtReal;

use crate::{CliResult, Failure};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Rows under a fixed header, plus summary lines written after the data.
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Value>>,
    pub summary: Vec<(String, Value)>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn ext(v: ExtReal) -> Value {
    match v {
        ExtReal::Finite(x) => json!(x),
        ExtReal::Infinite => json!("inf"),
    }
}

pub fn opt<T: Serialize>(v: Option<T>) -> Value {
    v.map_or(Value::Null, |x| json!(x))
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Writes `table` with a header naming the toolkit version and the resolved
/// configuration.
pub fn write(
    table: &Table,
    command: &str,
    config: &impl Serialize,
    format: Format,
    out: Option<&Path>,
) -> CliResult<()> {
    let config = serde_json::to_value(config).map_err(|e| Failure::Internal(e.to_string()))?;
    let mut buf = Vec::new();
    match format {
        Format::Csv => {
            writeln!(buf, "# mdist {} {command}", env!("CARGO_PKG_VERSION"))?;
            writeln!(buf, "# config {config}")?;
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                let csv_err = |e: csv::Error| Failure::Internal(e.to_string());
                w.write_record(table.columns).map_err(csv_err)?;
                for row in &table.rows {
                    w.write_record(row.iter().map(cell)).map_err(csv_err)?;
                }
                w.flush()?;
            }
            for (key, value) in &table.summary {
                match cell(value).as_str() {
                    "" => writeln!(buf, "# {key}")?,
                    v => writeln!(buf, "# {key} {v}")?,
                }
            }
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| {
                    Value::Object(
                        table
                            .columns
                            .iter()
                            .map(|c| c.to_string())
                            .zip(r.iter().cloned())
                            .collect(),
                    )
                })
                .collect();
            let summary: Map<String, Value> = table.summary.iter().cloned().collect();
            let doc = json!({
                "tool": "mdist",
                "version": env!("CARGO_PKG_VERSION"),
                "command": command,
                "config": config,
                "columns": table.columns,
                "rows": rows,
                "summary": summary,
            });
            serde_json::to_writer_pretty(&mut buf, &doc).map_err(|e| Failure::Internal(e.to_string()))?;
            buf.push(b'\n');
        }
    }
    emit(&buf, out)
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display()))),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}
