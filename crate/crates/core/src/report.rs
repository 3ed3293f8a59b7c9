//! Flat records and their CSV and JSON encodings.
//!
//! Floats are written with 17 significant digits in scientific notation, so
//! every value round-trips. Non-finite floats become `nan`, `inf` or `-inf`
//! in CSV and `null` in JSON. Negative zero is written as zero.

use std::fmt::Write as _;

/// One cell of a record.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

/// An ordered list of `(key, value)` pairs with lower_snake_case keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    fields: Vec<(String, Value)>,
}

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.push((key.to_string(), value.into()));
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|(k, _)| k.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn fields(&self) -> &[(String, Value)] {
        &self.fields
    }
}

/// 17 significant digits, e.g. `-1.0237352994377100e0`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if v == 0.0 {
        // drop the sign of negative zero
        format!("{:.16e}", 0.0)
    } else {
        format!("{v:.16e}")
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Float(f) => format_float(*f),
        Value::Int(i) => i.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Text(s) => {
            if s.contains([',', '"', '\n', '\r']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
    }
}

fn json_value(v: &Value) -> String {
    match v {
        Value::Float(f) if f.is_finite() => format_float(*f),
        Value::Float(_) => "null".to_string(),
        Value::Int(i) => i.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Text(s) => serde_json::to_string(s).unwrap_or_else(|_| "null".to_string()),
    }
}

/// Header from the first record's keys, one line per record, `\n` endings.
pub fn to_csv(records: &[Record]) -> String {
    let mut out = String::new();
    let Some(first) = records.first() else {
        return out;
    };
    let header: Vec<&str> = first.keys().collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in records {
        let cells: Vec<String> = header.iter().map(|k| r.get(k).map(csv_cell).unwrap_or_default()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// A single JSON object.
pub fn record_to_json(record: &Record) -> String {
    let mut out = String::from("{");
    for (i, (k, v)) in record.fields().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}: {}", json_value(&Value::Text(k.clone())), json_value(v));
    }
    out.push('}');
    out
}

/// A JSON array of objects, one per line.
pub fn to_json(records: &[Record]) -> String {
    let mut out = String::from("[\n");
    for (i, r) in records.iter().enumerate() {
        out.push_str("  ");
        out.push_str(&record_to_json(r));
        if i + 1 < records.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for v in [0.1, -1.0237352994377100, 1e-300, 6.02e23, 0.0] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_float(-0.0), "0.0000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let rows = vec![
            Record::new().with("x", 1.0).with("name", "a,b").with("n", 3usize),
            Record::new().with("x", f64::NAN).with("name", "plain").with("n", 4usize),
        ];
        let csv = to_csv(&rows);
        let lines: Vec<&str> = csv.split('\n').collect();
        assert_eq!(lines[0], "x,name,n");
        assert_eq!(lines[1], "1.0000000000000000e0,\"a,b\",3");
        assert_eq!(lines[2], "nan,plain,4");
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }

    #[test]
    fn json_layout() {
        let r = Record::new().with("log_det", -0.5).with("stable", true).with("bad", f64::INFINITY).with("msg", "q\"");
        let s = record_to_json(&r);
        assert_eq!(s, "{\"log_det\": -5.0000000000000000e-1, \"stable\": true, \"bad\": null, \"msg\": \"q\\\"\"}");
        let parsed: serde_json::Value = serde_json::from_str(&to_json(&[r.clone(), r])).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 2);
    }
}
