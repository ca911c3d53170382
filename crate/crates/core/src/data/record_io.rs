//! Run records as CSV:
//!
//! ```text
//! iter,sfo_calls,cpu_seconds,objective,gap,accuracy
//! ```
//!
//! Optional columns are left blank when absent. Floats are written in
//! shortest round-trip form, so reading back is lossless. The record label
//! and seed travel in the file name (see [`RunRecord::file_name`]).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::{RunRecord, RunRow};

pub const RECORD_HEADER: &str = "iter,sfo_calls,cpu_seconds,objective,gap,accuracy";

/// Streaming writer; rows go straight to disk.
pub struct RecordWriter<W: Write> {
    out: W,
    path: std::path::PathBuf,
}

impl RecordWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        RecordWriter::new(BufWriter::new(f), path)
    }
}

impl<W: Write> RecordWriter<W> {
    pub fn new(mut out: W, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        writeln!(out, "{RECORD_HEADER}").map_err(|e| Error::io(&path, e))?;
        Ok(RecordWriter { out, path })
    }

    pub fn write_row(&mut self, r: &RunRow) -> Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{},{}",
            r.iter,
            r.sfo_calls,
            opt(r.cpu_seconds),
            fmt(r.objective),
            opt(r.gap),
            opt(r.accuracy)
        )
        .map_err(|e| Error::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))?;
        Ok(self.out)
    }
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Streaming reader over the rows of a record file.
pub struct RecordReader {
    inner: csv::StringRecordsIntoIter<BufReader<File>>,
    path: std::path::PathBuf,
}

impl RecordReader {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(BufReader::new(f));
        let header = rdr
            .headers()
            .map_err(|e| Error::Parse { path: path.clone(), line: 1, msg: e.to_string() })?
            .iter()
            .collect::<Vec<_>>()
            .join(",");
        if header != RECORD_HEADER {
            return Err(Error::Parse { path, line: 1, msg: format!("unexpected header {header:?}") });
        }
        Ok(RecordReader { inner: rdr.into_records(), path })
    }
}

impl Iterator for RecordReader {
    type Item = Result<RunRow>;

    fn next(&mut self) -> Option<Self::Item> {
        let rec = self.inner.next()?;
        Some(rec.map_err(|e| Error::Parse { path: self.path.clone(), line: 0, msg: e.to_string() }).and_then(|rec| {
            let line = rec.position().map_or(0, |p| p.line() as usize);
            parse_row(&rec).map_err(|msg| Error::Parse { path: self.path.clone(), line, msg })
        }))
    }
}

fn parse_row(rec: &csv::StringRecord) -> std::result::Result<RunRow, String> {
    if rec.len() != 6 {
        return Err(format!("expected 6 fields, found {}", rec.len()));
    }
    let float = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number {s:?}"));
    let optional = |s: &str| if s.is_empty() { Ok(None) } else { float(s).map(Some) };
    Ok(RunRow {
        iter: rec[0].parse().map_err(|_| format!("bad iteration {:?}", &rec[0]))?,
        sfo_calls: rec[1].parse().map_err(|_| format!("bad SFO count {:?}", &rec[1]))?,
        cpu_seconds: optional(&rec[2])?,
        objective: float(&rec[3])?,
        gap: optional(&rec[4])?,
        accuracy: optional(&rec[5])?,
    })
}

/// Writes all rows of `record` to `path`.
pub fn write_run_record(record: &RunRecord, path: impl AsRef<Path>) -> Result<()> {
    let mut w = RecordWriter::create(path)?;
    for r in &record.rows {
        w.write_row(r)?;
    }
    w.finish().map(drop)
}

/// Reads a record; label and seed are recovered from a file name of the
/// form produced by [`RunRecord::file_name`], otherwise the label is the
/// file stem and the seed 0.
pub fn read_run_record(path: impl AsRef<Path>) -> Result<RunRecord> {
    let path = path.as_ref();
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    let (label, seed) = RunRecord::parse_file_stem(stem);
    let rows = RecordReader::open(path)?.collect::<Result<Vec<_>>>()?;
    Ok(RunRecord { label, seed, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunRecord {
        RunRecord {
            label: "drsvm-ssag".into(),
            seed: 7,
            rows: vec![
                RunRow { iter: 0, sfo_calls: 0, cpu_seconds: Some(0.0), objective: 1.0, gap: Some(0.5), accuracy: None },
                RunRow {
                    iter: 10,
                    sfo_calls: 40,
                    cpu_seconds: Some(1.234_567_890_123_456_7e-3),
                    objective: 0.1 + 0.2,
                    gap: None,
                    accuracy: Some(2.0 / 3.0),
                },
                RunRow { iter: 11, sfo_calls: 44, cpu_seconds: None, objective: -1e-300, gap: None, accuracy: None },
            ],
        }
    }

    #[test]
    fn roundtrip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let rec = sample();
        let p = dir.path().join(rec.file_name());
        write_run_record(&rec, &p).unwrap();
        assert_eq!(read_run_record(&p).unwrap(), rec);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with(RECORD_HEADER));
        assert!(text.contains("\n11,44,,-1e-300,,\n"));
    }

    #[test]
    fn header_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "iter,sfo,cpu,obj,gap,acc\n").unwrap();
        assert!(matches!(read_run_record(&p), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn streams_many_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("big.csv");
        let mut w = RecordWriter::create(&p).unwrap();
        for k in 0..1_000_000u64 {
            w.write_row(&RunRow { iter: k, sfo_calls: k, cpu_seconds: None, objective: k as f64, gap: None, accuracy: None })
                .unwrap();
        }
        w.finish().unwrap();
        let mut n = 0u64;
        for (k, r) in RecordReader::open(&p).unwrap().enumerate() {
            assert_eq!(r.unwrap().iter, k as u64);
            n += 1;
        }
        assert_eq!(n, 1_000_000);
    }
}
