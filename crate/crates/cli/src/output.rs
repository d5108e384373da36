//! The output envelope shared by every subcommand and its three renderings.
//!
//! Exact values are always strings (`"22"`, `"1/16"`) so JSON consumers never
//! round them; floats are JSON numbers in shortest round-trip form.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use clap::ValueEnum;
use runlength_core::rational::format_rational;
use runlength_core::{BigInt, ExactRational};
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Exactness {
    Exact,
    Float,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputEnvelope {
    pub command: String,
    pub version: String,
    pub params: Map<String, Value>,
    pub results: Map<String, Value>,
    pub exactness: BTreeMap<String, Exactness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
}

pub trait ExactValue {
    fn exact_string(&self) -> String;
}

impl ExactValue for BigInt {
    fn exact_string(&self) -> String {
        self.to_string()
    }
}

impl ExactValue for ExactRational {
    fn exact_string(&self) -> String {
        format_rational(self)
    }
}

impl ExactValue for u64 {
    fn exact_string(&self) -> String {
        self.to_string()
    }
}

pub fn exact_cell(v: &impl ExactValue) -> Value {
    Value::String(v.exact_string())
}

pub fn float_cell(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or_else(|| Value::String(v.to_string()), Value::Number)
}

impl OutputEnvelope {
    pub fn new(command: &str) -> Self {
        OutputEnvelope {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            params: Map::new(),
            results: Map::new(),
            exactness: BTreeMap::new(),
            table: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn exact(&mut self, key: &str, value: &impl ExactValue) -> &mut Self {
        self.results.insert(key.to_string(), exact_cell(value));
        self.exactness.insert(key.to_string(), Exactness::Exact);
        self
    }

    pub fn float(&mut self, key: &str, value: f64) -> &mut Self {
        self.results.insert(key.to_string(), float_cell(value));
        self.exactness.insert(key.to_string(), Exactness::Float);
        self
    }

    /// Non-numeric or structured results (flags, labels, notes).
    pub fn value(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.results.insert(key.to_string(), value.into());
        self
    }

    pub fn mark(&mut self, key: &str, exactness: Exactness) -> &mut Self {
        self.exactness.insert(key.to_string(), exactness);
        self
    }

    pub fn table(&mut self, columns: &[(&str, Option<Exactness>)], rows: Vec<Vec<Value>>) -> &mut Self {
        for (name, exactness) in columns {
            if let Some(e) = exactness {
                self.exactness.insert(format!("table.{name}"), *e);
            }
        }
        self.table = Some(Table {
            columns: columns.iter().map(|(c, _)| c.to_string()).collect(),
            rows,
        });
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
                s.push('\n');
                s
            }
            Format::Table => self.render_table(),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_table(&self) -> String {
        let mut out = String::new();
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={}", plain(v))).collect();
        let _ = writeln!(out, "{} {}", self.command, params.join(" "));
        let width = self.results.keys().map(String::len).max().unwrap_or(0);
        for (key, value) in &self.results {
            let _ = writeln!(out, "  {key:<width$}  {}", plain(value));
        }
        if let Some(table) = &self.table {
            out.push('\n');
            let cells: Vec<Vec<String>> = table.rows.iter().map(|r| r.iter().map(plain).collect()).collect();
            let widths: Vec<usize> = table
                .columns
                .iter()
                .enumerate()
                .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
                .collect();
            let line = |fields: &[String]| {
                fields
                    .iter()
                    .zip(&widths)
                    .map(|(f, w)| format!("{f:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            let _ = writeln!(out, "{}", line(&table.columns));
            for row in &cells {
                let _ = writeln!(out, "{}", line(row));
            }
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        if let Some(table) = &self.table {
            writer.write_record(&table.columns).expect("in-memory write");
            for row in &table.rows {
                writer.write_record(row.iter().map(plain)).expect("in-memory write");
            }
        } else {
            for (key, value) in &self.results {
                let mut record = vec![key.clone()];
                match value {
                    Value::Array(items) => record.extend(items.iter().map(plain)),
                    other => record.push(plain(other)),
                }
                writer.write_record(&record).expect("in-memory write");
            }
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

fn plain(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Array(items) if items.is_empty() => "-".to_string(),
        Value::Array(items) => items.iter().map(plain).collect::<Vec<_>>().join(", "),
        Value::Null => "-".to_string(),
        other => other.to_string(),
    }
}
