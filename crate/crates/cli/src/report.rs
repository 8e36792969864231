//! Output tables and their CSV/JSON renderings.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A rectangular table of JSON scalars.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(cell).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    fn json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let m: Map<String, Value> = self
                        .header
                        .iter()
                        .map(|h| h.to_string())
                        .zip(r.iter().cloned())
                        .collect();
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => {
            format!("\"{}\"", s.replace('"', "\"\""))
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// What a subcommand produces: a table, a JSON document, or both.
pub struct Report {
    pub table: Option<Table>,
    pub doc: Option<Value>,
    pub default: Format,
}

impl Report {
    pub fn table(t: Table) -> Self {
        Report {
            table: Some(t),
            doc: None,
            default: Format::Csv,
        }
    }

    pub fn doc(v: Value) -> Self {
        Report {
            table: None,
            doc: Some(v),
            default: Format::Json,
        }
    }

    pub fn both(t: Table, v: Value, default: Format) -> Self {
        Report {
            table: Some(t),
            doc: Some(v),
            default,
        }
    }

    pub fn render(&self, format: Option<Format>) -> Result<String, String> {
        match format.unwrap_or(self.default) {
            Format::Csv => match &self.table {
                Some(t) => Ok(t.csv()),
                None => Err("this subcommand has no CSV form; use --format json".into()),
            },
            Format::Json => {
                let v = match (&self.doc, &self.table) {
                    (Some(d), _) => d.clone(),
                    (None, Some(t)) => t.json(),
                    (None, None) => Value::Null,
                };
                let mut s = serde_json::to_string_pretty(&v).map_err(|e| e.to_string())?;
                s.push('\n');
                Ok(s)
            }
        }
    }
}
