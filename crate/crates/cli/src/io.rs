//! CSV and JSON formats.
//!
//! Coefficients: `n,re,im` with n = 0, 1, 2, … in order. Boundary samples:
//! `theta,re,im`, or `theta,v` for the imaginary part alone. Models and
//! complements are JSON.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;
use singularity_core::boundary::BoundarySamples;
use singularity_core::series::{CoefficientSeries, SingularityModel};

use crate::{CliError, CliResult};

pub enum Input {
    Coefficients(CoefficientSeries),
    Samples(BoundarySamples),
    /// Imaginary part only; the real part needs a mean from `--a0`.
    Imaginary(BoundarySamples),
}

fn input_err(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {msg}", path.display()))
}

/// Round to 12 significant digits. Negative zero prints as zero.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest text for the 12-digit value, in exponent form when very small or large.
pub fn fmt(x: f64) -> String {
    let r = sig12(x);
    if r != 0.0 && (r.abs() < 1e-4 || r.abs() >= 1e12) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn read_table(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| input_err(path, e))?;
    let headers: Vec<String> = reader.headers().map_err(|e| input_err(path, e))?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| input_err(path, e))?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| input_err(path, format!("row {}: cannot parse {f:?}", i + 1))))
            .collect::<CliResult<Vec<f64>>>()?;
        if row.len() != headers.len() {
            return Err(input_err(path, format!("row {} has {} fields", i + 1, row.len())));
        }
        rows.push(row);
    }
    Ok((headers, rows))
}

/// Reads any of the three CSV layouts, told apart by the header.
pub fn read_input(path: &Path) -> CliResult<Input> {
    let (headers, rows) = read_table(path)?;
    let header: Vec<&str> = headers.iter().map(String::as_str).collect();
    match header.as_slice() {
        ["n", "re", "im"] => {
            for (i, row) in rows.iter().enumerate() {
                if row[0] != i as f64 {
                    return Err(input_err(path, format!("row {} has n = {}, expected {i}", i + 1, row[0])));
                }
            }
            let values = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
            Ok(Input::Coefficients(CoefficientSeries::new(values).map_err(|e| input_err(path, e))?))
        }
        ["theta", "re", "im"] => {
            let thetas: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            let values = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
            Ok(Input::Samples(BoundarySamples::from_grid(&thetas, values).map_err(|e| input_err(path, e))?))
        }
        ["theta", "v"] => {
            let thetas: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            let values = rows.iter().map(|r| Complex64::new(r[1], 0.0)).collect();
            Ok(Input::Imaginary(BoundarySamples::from_grid(&thetas, values).map_err(|e| input_err(path, e))?))
        }
        _ => Err(input_err(path, format!("unrecognised header {:?}; expected n,re,im or theta,re,im or theta,v", headers))),
    }
}

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> CliResult<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| input_err(path, e))?;
    writer.write_record(header).map_err(|e| input_err(path, e))?;
    for row in rows {
        writer.write_record(&row).map_err(|e| input_err(path, e))?;
    }
    writer.flush().map_err(|e| input_err(path, e))
}

pub fn write_coefficients(path: &Path, series: &CoefficientSeries) -> CliResult<()> {
    let rows = series.as_slice().iter().enumerate().map(|(n, c)| vec![n.to_string(), fmt(c.re), fmt(c.im)]);
    write_rows(path, &["n", "re", "im"], rows)
}

pub fn write_samples(path: &Path, samples: &BoundarySamples) -> CliResult<()> {
    let rows = samples.values().iter().enumerate().map(|(j, v)| vec![fmt(samples.theta(j)), fmt(v.re), fmt(v.im)]);
    write_rows(path, &["theta", "re", "im"], rows)
}

/// Writes a CSV after `#`-prefixed metadata lines.
pub fn write_annotated(path: &Path, meta: &[(String, String)], header: &[&str], rows: &[Vec<f64>]) -> CliResult<()> {
    let mut out = String::new();
    for (key, value) in meta {
        out.push_str(&format!("# {key}: {value}\n"));
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|&x| fmt(x)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| input_err(path, e))
}

pub fn read_model(path: &Path) -> CliResult<SingularityModel> {
    let text = fs::read_to_string(path).map_err(|e| input_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| input_err(path, e))
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().and_then(|x| serde_json::Number::from_f64(sig12(x))) {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::Input(format!("cannot encode JSON: {e}")))?;
    round_floats(&mut v);
    let mut text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Input(format!("cannot encode JSON: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Writes to `path`, or to stdout when none is given.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| input_err(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}
