//! Dense return tables (days x assets) from CSV.

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsTable {
    /// First-column labels when a date column was requested.
    pub dates: Option<Vec<String>>,
    /// One row per day, one column per asset.
    pub returns: DMatrix<f64>,
    /// Rows discarded because a cell was missing, unparsable or non-finite.
    pub dropped: usize,
}

impl ReturnsTable {
    pub fn shape(&self) -> (usize, usize) {
        self.returns.shape()
    }
}

/// Reads a rectangular CSV of returns.
///
/// With `date_column` the first column is kept as a label and excluded
/// from the matrix. Rows with any bad numeric cell are dropped and counted;
/// rows with a different number of fields are an error.
pub fn load_returns_csv(path: impl AsRef<Path>, has_header: bool, date_column: bool) -> Result<ReturnsTable> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut width = None;
    let mut values = Vec::new();
    let mut dates = Vec::new();
    let mut rows = 0usize;
    let mut dropped = 0usize;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(rec.len()),
            Some(w) if w != rec.len() => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("expected {w} fields, found {}", rec.len()),
                })
            }
            _ => {}
        }
        let skip = usize::from(date_column);
        let parsed: Option<Vec<f64>> = rec
            .iter()
            .skip(skip)
            .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        match parsed {
            Some(row) => {
                if date_column {
                    dates.push(rec[0].to_string());
                }
                values.extend(row);
                rows += 1;
            }
            None => dropped += 1,
        }
    }
    let cols = width.unwrap_or(0).saturating_sub(usize::from(date_column));
    if rows == 0 || cols == 0 {
        return Err(Error::Data(format!("{}: no usable return rows", path.display())));
    }
    Ok(ReturnsTable {
        dates: date_column.then_some(dates),
        returns: DMatrix::from_row_slice(rows, cols, &values),
        dropped,
    })
}

/// Writes a returns table with a generated header (`date` first when
/// dates are present, then `a0, a1, ...`).
pub fn write_returns_csv(table: &ReturnsTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let (rows, cols) = table.returns.shape();
    let mut header: Vec<String> = Vec::new();
    if table.dates.is_some() {
        header.push("date".into());
    }
    header.extend((0..cols).map(|j| format!("a{j}")));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for i in 0..rows {
        let mut rec: Vec<String> = Vec::with_capacity(cols + 1);
        if let Some(d) = &table.dates {
            rec.push(d[i].clone());
        }
        rec.extend(table.returns.row(i).iter().map(|v| format!("{v:?}")));
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse { path: path.to_path_buf(), line: line.unwrap_or(0), msg: format!("{other:?}") },
    }
}
