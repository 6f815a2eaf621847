//! Rectangular result tables with a CSV and a JSON encoding.
//!
//! Floats are written with 17 significant digits in CSV, so parsing a file
//! and writing it again reproduces it byte for byte.

use serde_json::{json, Map, Number, Value};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn empty() -> Self {
        Cell::Text(String::new())
    }

    pub fn yes_no(b: bool) -> Self {
        Cell::text(if b { "yes" } else { "no" })
    }

    fn to_csv_field(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn from_csv_field(s: &str) -> Cell {
        let looks_float = s.contains(['.', 'e', 'E']) || matches!(s, "NaN" | "inf" | "-inf");
        if !looks_float {
            if let Ok(i) = s.parse::<i64>() {
                return Cell::Int(i);
            }
        }
        if looks_float {
            if let Ok(x) = s.parse::<f64>() {
                return Cell::Float(x);
            }
        }
        Cell::Text(s.to_string())
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Text(s) => json!(s),
        }
    }

    fn from_json(v: &Value) -> Result<Cell, CliError> {
        match v {
            Value::Null => Ok(Cell::Float(f64::NAN)),
            Value::String(s) => Ok(Cell::Text(s.clone())),
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Cell::Int(i))
                } else {
                    n.as_f64().map(Cell::Float).ok_or_else(|| CliError::Config(format!("bad number {n}")))
                }
            }
            other => Err(CliError::Config(format!("unexpected table cell {other}"))),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv_field)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    pub fn from_csv(name: &str, text: &str) -> Result<Self, CliError> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let bad = |e: csv::Error| CliError::Config(format!("csv table {name}: {e}"));
        let columns = r.headers().map_err(bad)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in r.records() {
            rows.push(record.map_err(bad)?.iter().map(Cell::from_csv_field).collect());
        }
        Ok(Self { name: name.into(), columns, rows })
    }

    pub fn to_json_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("columns".into(), json!(self.columns));
        m.insert(
            "rows".into(),
            Value::Array(
                self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::to_json).collect())).collect(),
            ),
        );
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn from_json_value(name: &str, v: &Value) -> Result<Self, CliError> {
        let bad = |m: &str| CliError::Config(format!("json table {name}: {m}"));
        let columns = v
            .get("columns")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing columns"))?
            .iter()
            .map(|c| c.as_str().map(str::to_string).ok_or_else(|| bad("non-string column")))
            .collect::<Result<Vec<_>, _>>()?;
        let mut rows = Vec::new();
        for row in v.get("rows").and_then(Value::as_array).ok_or_else(|| bad("missing rows"))? {
            let cells = row.as_array().ok_or_else(|| bad("row is not an array"))?;
            rows.push(cells.iter().map(Cell::from_json).collect::<Result<Vec<_>, _>>()?);
        }
        Ok(Self { name: name.into(), columns, rows })
    }

    pub fn from_json(name: &str, text: &str) -> Result<Self, CliError> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("json table {name}: {e}")))?;
        Self::from_json_value(name, &v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("demo", &["n", "x", "note"]);
        t.push(vec![Cell::Int(3), Cell::Float(0.1), Cell::text("a, quoted \"word\"")]);
        t.push(vec![Cell::Int(-7), Cell::Float(-1e-300), Cell::empty()]);
        t.push(vec![Cell::Int(0), Cell::Float(f64::NAN), Cell::text("yes")]);
        t.push(vec![Cell::Int(1), Cell::Float(1.0 / 3.0), Cell::text("12")]);
        t
    }

    #[test]
    fn csv_round_trip_is_byte_exact() {
        let csv = sample().to_csv();
        assert!(csv.contains("1.0000000000000001e-1"));
        let again = Table::from_csv("demo", &csv).unwrap().to_csv();
        assert_eq!(csv, again);
    }

    #[test]
    fn csv_floats_keep_every_bit() {
        let t = Table::from_csv("demo", &sample().to_csv()).unwrap();
        assert_eq!(t.rows[3][1], Cell::Float(1.0 / 3.0));
    }

    #[test]
    fn json_round_trip_is_byte_exact() {
        let json = sample().to_json();
        let again = Table::from_json("demo", &json).unwrap().to_json();
        assert_eq!(json, again);
    }
}
