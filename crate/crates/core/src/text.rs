//! Row-major decimal text for dense matrices.
//!
//! One row per line, entries separated by single spaces. Floats use Rust's
//! shortest round-trip representation, so parsing recovers the exact bits.

use std::fmt::Write;

use crate::error::{Error, Result};

pub(crate) fn write_rows(out: &mut String, cols: usize, data: &[f64]) {
    for row in data.chunks(cols) {
        for (i, x) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{x}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
}

pub(crate) fn parse_row(line: &str) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number `{tok}`: {e}")))
        })
        .collect()
}

/// Parses non-empty lines into a rectangular matrix. Returns `(rows, cols, data)`.
pub(crate) fn parse_rows<'a>(lines: impl IntoIterator<Item = &'a str>) -> Result<(usize, usize, Vec<f64>)> {
    let mut data = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = parse_row(line)?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::Parse(format!(
                    "ragged matrix: row {rows} has {} entries, expected {c}",
                    row.len()
                )))
            }
            _ => {}
        }
        data.extend(row);
        rows += 1;
    }
    Ok((rows, cols.unwrap_or(0), data))
}

/// Parses a `key=value` header token list such as `V=100 K=5`.
pub(crate) fn header_value(header: &str, key: &str) -> Result<usize> {
    header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::Parse(format!("header `{header}` lacks `{key}=`")))?
        .parse()
        .map_err(|e| Error::Parse(format!("header `{key}`: {e}")))
}
