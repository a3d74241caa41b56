//! Plain-text vectors: one decimal value per line, or a single-column CSV
//! with an optional non-numeric header on the first line.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn read_vector(path: &Path) -> CliResult<Vec<f64>> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| CliError::io(path, e))?;
    parse_vector(&text).map_err(|(line, message)| CliError::Parse { path: path.to_path_buf(), line, message })
}

/// Parses vector text; errors carry the 1-based line number.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, (usize, String)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            (line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let is_first = std::mem::replace(&mut first, false);
        if record.len() != 1 {
            return Err((line, format!("expected one column, found {}", record.len())));
        }
        let field = &record[0];
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => return Err((line, format!("non-finite value `{field}`"))),
            Err(_) if is_first && is_header(field) => {}
            Err(_) => return Err((line, format!("cannot parse `{field}` as a number"))),
        }
    }
    if values.is_empty() {
        return Err((1, "no values".to_string()));
    }
    Ok(values)
}

fn is_header(field: &str) -> bool {
    field.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && field.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(field.to_ascii_lowercase().as_str(), "nan" | "inf" | "infinity")
}

pub fn write_vector(path: &Path, values: &[f64]) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for &v in values {
        writeln!(w, "{}", fmt_f64(v)).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
