use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;
use crate::CliError;

pub type Row = Map<String, Value>;

/// Records of one run, all sharing the same metadata block.
pub struct Report {
    pub meta: Value,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(meta: Value) -> Self {
        Self {
            meta,
            rows: Vec::new(),
        }
    }

    pub fn push<T: Serialize>(&mut self, row: &T) -> Result<(), CliError> {
        match serde_json::to_value(row)? {
            Value::Object(map) => self.rows.push(map),
            other => {
                let mut map = Map::new();
                map.insert("value".into(), other);
                self.rows.push(map);
            }
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, format: Format, mut out: W) -> Result<(), CliError> {
        match format {
            Format::Json => {
                for row in &self.rows {
                    let mut record = Map::new();
                    record.insert("meta".into(), self.meta.clone());
                    record.extend(row.clone());
                    serde_json::to_writer(&mut out, &record)?;
                    writeln!(out)?;
                }
            }
            Format::Csv => {
                writeln!(out, "# {}", serde_json::to_string(&self.meta)?)?;
                let mut w = csv::Writer::from_writer(&mut out);
                if let Some(first) = self.rows.first() {
                    w.write_record(first.keys())?;
                }
                for row in &self.rows {
                    w.write_record(row.values().map(cell))?;
                }
                w.flush()?;
            }
            Format::Text => {
                return Err(CliError::Validation(
                    "text output is only available for sample-env".into(),
                ))
            }
        }
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}
