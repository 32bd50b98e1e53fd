// SPDX-License-Identifier: MIT OR Apache-2.0

//! Series CSV files.
//!
//! Input holds one value per line, or `index,value` pairs of which only the
//! value is used. A single header line is recognised when its value field
//! does not parse as a number. LF and CRLF line endings are accepted and
//! `.` is the decimal separator.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use pqar_core::TimeSeries;

use crate::error::{PqarError, Result};

/// Parses a series from CSV text. Row numbers in errors are 1-based lines.
pub fn parse_series<R: Read>(reader: R) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut width = None;
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| PqarError::Row {
            row: e.position().map_or(i as u64 + 1, |p| p.line()),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(i as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let fields = record.len();
        if fields > 2 {
            return Err(PqarError::Row {
                row,
                message: format!("expected 1 or 2 columns, found {fields}"),
            });
        }
        let field = &record[fields - 1];
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                if *width.get_or_insert(fields) != fields {
                    return Err(PqarError::Row {
                        row,
                        message: format!("expected {} columns, found {fields}", width.unwrap()),
                    });
                }
                values.push(v);
            }
            Ok(v) => {
                return Err(PqarError::Row {
                    row,
                    message: format!("non-finite value {v}"),
                })
            }
            // a header is only allowed before any data
            Err(_) if values.is_empty() && width.is_none() && row == 1 => {
                width = Some(fields);
            }
            Err(_) => {
                return Err(PqarError::Row {
                    row,
                    message: format!("not a number: {field:?}"),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(PqarError::Input("the input contains no observations".into()));
    }
    Ok(TimeSeries::new(values)?)
}

pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let file = File::open(path).map_err(|source| PqarError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_series(file)
}

/// Writes `t,value` rows with a 1-based `t`.
pub fn write_series<W: Write>(writer: W, series: &TimeSeries) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "value"])?;
    for (t, v) in series.values().iter().enumerate() {
        w.write_record([(t + 1).to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Creates `path` and hands it to `f`, mapping IO failures to the path.
pub fn write_file(path: &Path, f: impl FnOnce(&mut File) -> std::io::Result<()>) -> Result<()> {
    let wrap = |source| PqarError::Write {
        path: path.to_owned(),
        source,
    };
    let mut file = File::create(path).map_err(wrap)?;
    f(&mut file).map_err(wrap)
}
