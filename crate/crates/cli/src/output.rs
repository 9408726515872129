use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A finished command result in both encodings.
pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
    /// `false` when a check failed.
    pub passed: bool,
}

/// At most 12 significant digits, trailing zeros removed.
pub fn num(x: f64) -> String {
    sig(x, 12)
}

/// Error estimates: 3 significant digits.
pub fn err(x: f64) -> String {
    format!("{x:.2e}")
}

fn sig(x: f64, digits: i32) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..digits).contains(&exp) {
        let s = format!("{:.*e}", (digits - 1) as usize, x);
        let (mantissa, e) = s.split_once('e').unwrap();
        return format!("{}e{e}", trim(mantissa));
    }
    let decimals = (digits - 1 - exp).max(0) as usize;
    trim(&format!("{x:.decimals$}")).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// The 12-digit value as a JSON number (`null` when not finite).
pub fn jnum(x: f64) -> Value {
    num(x).parse::<f64>().ok().and_then(|v| serde_json::Number::from_f64(v).map(Value::Number)).unwrap_or(Value::Null)
}

pub fn jerr(x: f64) -> Value {
    err(x).parse::<f64>().ok().and_then(|v| serde_json::Number::from_f64(v).map(Value::Number)).unwrap_or(Value::Null)
}

pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> io::Result<()> {
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            w.write_record(&report.header)?;
            for row in &report.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &report.json)?;
            writeln!(sink)?;
        }
    }
    sink.flush()
}
