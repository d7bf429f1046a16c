//! Flat records written as JSON lines or CSV.

use std::io::Write;

use serde::ser::{Serialize, SerializeMap, Serializer};

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Null,
}

impl Field {
    /// Non-finite floats become `inf`, `-inf` or `nan`; everything else is
    /// rendered as in JSON.
    fn csv_cell(&self) -> String {
        match self {
            Field::Float(v) if v.is_finite() => serde_json::to_string(v).expect("finite float"),
            Field::Float(v) if v.is_nan() => "nan".into(),
            Field::Float(v) if *v > 0.0 => "inf".into(),
            Field::Float(_) => "-inf".into(),
            Field::Int(v) => v.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Text(s) => s.clone(),
            Field::Null => String::new(),
        }
    }
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Field::Float(v) if v.is_finite() => s.serialize_f64(*v),
            Field::Float(_) | Field::Null => s.serialize_unit(),
            Field::Int(v) => s.serialize_u64(*v),
            Field::Bool(b) => s.serialize_bool(*b),
            Field::Text(t) => s.serialize_str(t),
        }
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Float(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as u64)
    }
}

impl From<u32> for Field {
    fn from(v: u32) -> Self {
        Field::Int(v as u64)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_string())
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Text(v)
    }
}

impl<T: Into<Field>> From<Option<T>> for Field {
    fn from(v: Option<T>) -> Self {
        v.map_or(Field::Null, Into::into)
    }
}

/// An ordered list of named fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(Vec<(String, Field)>);

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<Field>) {
        self.0.push((key.into(), value.into()));
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<Field>) -> Self {
        self.push(key, value);
        self
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(k, _)| k.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&Field> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format '{other}' (expected json or csv)")),
        }
    }
}

/// Write `records` in order. CSV takes its header from the first record.
pub fn write_records(
    records: &[Record],
    format: Format,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    match format {
        Format::Json => {
            for r in records {
                serde_json::to_writer(&mut *out, r)?;
                out.write_all(b"\n")?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            if let Some(first) = records.first() {
                w.write_record(first.keys())?;
            }
            for r in records {
                w.write_record(r.0.iter().map(|(_, v)| v.csv_cell()))?;
            }
            w.flush()?;
        }
    }
    out.flush()
}
