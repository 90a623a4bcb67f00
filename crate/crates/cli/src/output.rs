//! Deterministic CSV emission: UTF-8, `.` decimal separator, 12
//! significant digits, byte-identical for a fixed config and seed.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

/// 12 significant digits in scientific notation; exact zero prints as `0`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Debug, Clone)]
pub struct Row {
    pub fields: Vec<String>,
    pub ok: bool,
}

impl Row {
    pub fn ok(mut fields: Vec<String>) -> Row {
        fields.push("ok".to_string());
        Row { fields, ok: true }
    }

    /// A failed row: the leading identifying fields, empty cells for the
    /// missing values, and the error in the status column (commas stripped
    /// to keep the CSV well formed).
    pub fn failed(mut fields: Vec<String>, width: usize, err: &str) -> Row {
        while fields.len() + 1 < width {
            fields.push(String::new());
        }
        fields.push(format!("error: {}", err.replace(',', ";")));
        Row { fields, ok: false }
    }
}

/// Write header, rows and trailing comment lines to `out` (stdout when
/// `None`). Returns process exit code 0, or 1 when any row failed.
pub fn write_csv(
    out: Option<&Path>,
    header: &[&str],
    rows: &[Row],
    comments: &[String],
) -> Result<i32> {
    let mut buf = Vec::new();
    writeln!(buf, "{}", header.join(","))?;
    for row in rows {
        debug_assert_eq!(row.fields.len(), header.len());
        writeln!(buf, "{}", row.fields.join(","))?;
    }
    for c in comments {
        writeln!(buf, "# {c}")?;
    }
    match out {
        Some(path) => std::fs::write(path, &buf)
            .with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(if rows.iter().all(|r| r.ok) { 0 } else { 1 })
}
