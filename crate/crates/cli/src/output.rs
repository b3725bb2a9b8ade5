//! CSV and JSON writers for sweep tables.

use std::io::Write;

use serde_json::{json, Map};

use crate::sweep::{Table, Value};
use crate::CliError;

/// Version of the JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn cell_text(v: &Value) -> String {
    match v {
        // Display prints the shortest string that round-trips
        Value::Num(x) => x.to_string(),
        Value::Text(s) => s.clone(),
        Value::Missing => String::new(),
    }
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(cell_text))?;
    }
    w.flush()?;
    Ok(())
}

/// `{"schema_version": 1, "columns": [...], "rows": [{column: value}]}`;
/// missing values and non-finite numbers become `null`.
pub fn write_json<W: Write>(table: &Table, mut out: W) -> Result<(), CliError> {
    let rows: Vec<serde_json::Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (name, v) in table.columns.iter().zip(row) {
                let value = match v {
                    Value::Num(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, Into::into),
                    Value::Text(s) => s.clone().into(),
                    Value::Missing => serde_json::Value::Null,
                };
                obj.insert(name.clone(), value);
            }
            serde_json::Value::Object(obj)
        })
        .collect();
    let doc = json!({ "schema_version": SCHEMA_VERSION, "columns": table.columns, "rows": rows });
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

pub fn write<W: Write>(table: &Table, format: Format, out: W) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(table, out),
        Format::Json => write_json(table, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        Table {
            columns: vec!["p".into(), "delta_phi".into(), "status".into()],
            rows: vec![
                vec![Value::Num(0.1), Value::Num(-1.0 / 3.0), Value::Text("ok".into())],
                vec![Value::Num(0.2), Value::Missing, Value::Text("bad, regime".into())],
            ],
        }
    }

    #[test]
    fn csv_round_trips_numbers() {
        let mut buf = Vec::new();
        write_csv(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("p,delta_phi,status"));
        let first = lines.next().unwrap();
        let x: f64 = first.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(x, -1.0 / 3.0);
        assert_eq!(lines.next(), Some("0.2,,\"bad, regime\""));
    }

    #[test]
    fn json_layout() {
        let mut buf = Vec::new();
        write_json(&sample(), &mut buf).unwrap();
        let doc: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(doc["schema_version"], 1);
        assert_eq!(doc["columns"][1], "delta_phi");
        assert_eq!(doc["rows"][0]["delta_phi"].as_f64(), Some(-1.0 / 3.0));
        assert!(doc["rows"][1]["delta_phi"].is_null());
    }
}
