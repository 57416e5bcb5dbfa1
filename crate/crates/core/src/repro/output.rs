//! CSV and JSON writers for run results.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::error::Result;
use crate::series::TimeSeries;

use super::config::{RunConfig, EMBEDDED_PREFIX};

/// Everything needed to write one output file.
#[derive(Clone, Debug)]
pub struct Report<'a> {
    /// Subcommand that produced the data, e.g. `fig2`.
    pub command: &'a str,
    pub config: &'a RunConfig,
    /// Name of the key column (`t_over_g` or `ratio`).
    pub key: &'a str,
    pub data: &'a TimeSeries,
}

pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Seconds since the Unix epoch, taken from `SOURCE_DATE_EPOCH` when set so
/// that repeated runs produce identical files.
pub fn timestamp() -> u64 {
    if let Some(v) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
    {
        return v;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(report: &Report<'_>, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "# qdyn {} {}", report.command, version())?;
    writeln!(out, "# timestamp = {}", timestamp())?;
    for (k, v) in report.config.to_pairs() {
        writeln!(out, "{EMBEDDED_PREFIX} {k} = {v}")?;
    }
    let names = report.data.column_names();
    write!(out, "{}", report.key)?;
    for n in &names {
        write!(out, ",{n}")?;
    }
    writeln!(out)?;
    let cols: Vec<&[f64]> = report.data.columns().map(|(_, v)| v).collect();
    for (k, t) in report.data.t.iter().enumerate() {
        write!(out, "{}", format_float(*t))?;
        for c in &cols {
            write!(out, ",{}", format_float(c[k]))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn to_json(report: &Report<'_>) -> Value {
    let config: Map<String, Value> = report
        .config
        .to_pairs()
        .into_iter()
        .map(|(k, v)| (k, Value::String(v)))
        .collect();
    let mut columns = Map::new();
    columns.insert(report.key.to_string(), json!(report.data.t));
    for (n, v) in report.data.columns() {
        columns.insert(n.to_string(), json!(v));
    }
    json!({
        "config": config,
        "columns": columns,
        "provenance": {
            "tool": "qdyn",
            "command": report.command,
            "version": version(),
            "timestamp": timestamp(),
        },
    })
}

pub fn write_json(report: &Report<'_>, out: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(&to_json(report))
        .map_err(|e| crate::error::Error::Config(format!("cannot encode JSON: {e}")))?;
    writeln!(out, "{text}")?;
    Ok(())
}

pub fn write_report(report: &Report<'_>, out: &mut dyn Write) -> Result<()> {
    match report.config.format {
        super::config::Format::Csv => write_csv(report, out),
        super::config::Format::Json => write_json(report, out),
    }
}
