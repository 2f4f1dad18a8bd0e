//! CSV and JSON rendering of report tables.

use serde_json::{json, Map, Value as Json};

use super::config::RunConfig;
use super::Report;

/// One table cell. Text cells hold identifiers only (no commas or quotes).
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_nan() => "nan".into(),
            Cell::Num(x) => format!("{x:.12e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::Num(x) if !x.is_finite() => Json::Null,
            Cell::Num(x) => json!(x),
            Cell::Int(n) => json!(n),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

pub fn render_csv(report: &Report) -> String {
    let mut out = report.columns.join(",");
    out.push('\n');
    for row in &report.rows {
        let line: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn render_json(report: &Report, config: &RunConfig) -> String {
    let rows: Vec<Json> = report
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Json> =
                report.columns.iter().zip(row).map(|(k, v)| (k.to_string(), v.json())).collect();
            Json::Object(obj)
        })
        .collect();
    let doc = json!({
        "meta": {
            "command": report.command.name(),
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
        },
        "rows": rows,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("report tables serialise");
    text.push('\n');
    text
}
