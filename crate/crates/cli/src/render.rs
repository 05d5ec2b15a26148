//! Report output: JSON lines or CSV, floats rounded to 12 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::args::Format;

pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Rounds every non-integer number in `v` in place.
pub fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().unwrap_or_default());
            if let Some(r) = serde_json::Number::from_f64(x) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn to_value<T: Serialize>(record: &T) -> Value {
    serde_json::to_value(record).expect("report records serialize")
}

/// A CSV cell.
pub fn cell(v: impl Into<Value>) -> String {
    match v.into() {
        Value::Null => String::new(),
        Value::String(s) => s,
        mut other => {
            round_value(&mut other);
            other.to_string()
        }
    }
}

pub struct Sink {
    format: Format,
    out: Box<dyn Write>,
    header_written: bool,
}

impl Sink {
    pub fn open(format: Format, path: Option<&Path>) -> io::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Self { format, out, header_written: false })
    }

    /// One JSON record per line. Ignored in CSV mode.
    pub fn json(&mut self, mut record: Value) -> io::Result<()> {
        if self.format != Format::Json {
            return Ok(());
        }
        round_value(&mut record);
        writeln!(self.out, "{record}")
    }

    /// One CSV row, preceded by `header` the first time. Ignored in JSON mode.
    pub fn csv_row(&mut self, header: &[&str], row: Vec<String>) -> io::Result<()> {
        if self.format != Format::Csv {
            return Ok(());
        }
        if !self.header_written {
            self.write_csv(header.iter().map(|s| s.to_string()))?;
            self.header_written = true;
        }
        self.write_csv(row)
    }

    fn write_csv(&mut self, fields: impl IntoIterator<Item = String>) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(fields).map_err(io::Error::other)?;
        let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
        self.out.write_all(&bytes)
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}
