//! CSV and JSON serialization with atomic file replacement.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::fracgauss::{AxisKind, ComplexGrid};
use crate::momentsolve::ExponentialSum;
use crate::{Error, Result};

/// `x` with 17 significant digits, enough to recover the exact double.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with the given header and one column per entry of `columns`.
pub fn columns_csv(header: &[String], columns: &[Vec<f64>]) -> Result<String> {
    if header.len() != columns.len() {
        return Err(Error::InvalidInput("header and column counts differ".into()));
    }
    let rows = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::InvalidInput("columns have different lengths".into()));
    }
    let mut out = header.join(",");
    out.push('\n');
    for j in 0..rows {
        for (k, c) in columns.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&format_float(c[j]));
        }
        out.push('\n');
    }
    Ok(out)
}

/// CSV with header `axis,re,im` followed by `re_<name>,im_<name>` for every
/// extra series.
pub fn grid_csv(grid: &ComplexGrid, extra: &[(&str, &[Complex64])]) -> Result<String> {
    if let Some((name, _)) = extra.iter().find(|(_, v)| v.len() != grid.len()) {
        return Err(Error::InvalidInput(format!("series `{name}` does not match the grid length")));
    }
    let mut header = vec!["axis".to_string(), "re".to_string(), "im".to_string()];
    let mut columns = vec![grid.axis.clone(), grid.values.iter().map(|z| z.re).collect(), grid.values.iter().map(|z| z.im).collect()];
    for (name, series) in extra {
        header.push(format!("re_{name}"));
        header.push(format!("im_{name}"));
        columns.push(series.iter().map(|z| z.re).collect());
        columns.push(series.iter().map(|z| z.im).collect());
    }
    columns_csv(&header, &columns)
}

/// Reads the first three columns of a grid CSV.
pub fn parse_grid_csv(text: &str, axis_kind: AxisKind) -> Result<ComplexGrid> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.starts_with("axis,re,im") => {}
        _ => return Err(Error::InvalidInput("missing `axis,re,im` header".into())),
    }
    let mut axis = Vec::new();
    let mut values = Vec::new();
    for (k, line) in lines.enumerate() {
        let mut fields = line.split(',').map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("row {}: {e}", k + 1)))
        });
        let mut next = || fields.next().unwrap_or_else(|| Err(Error::InvalidInput(format!("row {} is short", k + 1))));
        axis.push(next()?);
        let re = next()?;
        values.push(Complex64::new(re, next()?));
    }
    ComplexGrid::new(axis, values, axis_kind)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| with_path(e, path))?;
    Ok(serde_json::from_str(&text)?)
}

fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn read_sum(path: &Path) -> Result<ExponentialSum> {
    let sum: ExponentialSum = read_json(path)?;
    if sum.terms.is_empty() {
        return Err(Error::InvalidInput(format!("{} holds an empty sum", path.display())));
    }
    Ok(sum)
}

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| with_path(e, dir))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| with_path(e.error, path))?;
    Ok(())
}
