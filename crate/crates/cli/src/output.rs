//! Tabular output in the JSON envelope or as plain CSV.

use std::io::Write;

use clap::ValueEnum;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

/// Bumped only when a field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Str(String),
    Bool(bool),
    Null,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_owned())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            // serde_json writes the shortest string that round-trips, which
            // never needs more than 17 significant digits; non-finite
            // values become null.
            Cell::Num(v) => s.serialize_f64(*v),
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Str(v) => s.serialize_str(v),
            Cell::Bool(v) => s.serialize_bool(*v),
            Cell::Null => s.serialize_none(),
        }
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Num(v) => sig10(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Str(v) => v.clone(),
            Cell::Bool(v) => v.to_string(),
            Cell::Null => String::new(),
        }
    }
}

/// Ten significant digits, fixed notation for moderate magnitudes and
/// scientific otherwise, trailing zeros removed.
pub fn sig10(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s.to_owned()
    }
}

/// A named-column table; every row has one cell per column.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                let env = Envelope { schema_version: SCHEMA_VERSION, format, records: self.records() };
                serde_json::to_writer_pretty(&mut *out, &env)?;
                writeln!(out)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::to_csv))?;
                }
                w.flush()
            }
        }
    }

    fn records(&self) -> Vec<Record<'_>> {
        self.rows.iter().map(|cells| Record { columns: &self.columns, cells }).collect()
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    format: Format,
    records: Vec<Record<'a>>,
}

/// One row serialized as an object with fields in column order.
struct Record<'a> {
    columns: &'a [&'static str],
    cells: &'a [Cell],
}

impl Serialize for Record<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.cells.len()))?;
        for (k, v) in self.columns.iter().zip(self.cells) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(1.0), "1");
        assert_eq!(sig10(1.0264522830123), "1.026452283");
        assert_eq!(sig10(-0.5467123456789), "-0.5467123457");
        assert_eq!(sig10(147_768.123_456_7), "147768.1235");
        assert_eq!(sig10(1.25e-7), "1.25e-7");
        assert_eq!(sig10(6.02214076e23), "6.02214076e23");
        assert_eq!(sig10(0.00012), "0.00012");
        assert_eq!(sig10(f64::INFINITY), "inf");
    }

    #[test]
    fn ten_digit_values_survive_the_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.5e-12, 123456.789, -7.0] {
            let back: f64 = sig10(v).parse().unwrap();
            assert!((back / v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn json_keeps_column_order_and_full_precision() {
        let mut t = Table::new(&["b", "a"]);
        t.push(vec![Cell::Num(0.1 + 0.2), Cell::Null]);
        let mut buf = Vec::new();
        t.write(Format::Json, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.find("\"b\"").unwrap() < s.find("\"a\"").unwrap());
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["records"][0]["b"].as_f64().unwrap(), 0.1 + 0.2);
        assert!(v["records"][0]["a"].is_null());
    }
}
