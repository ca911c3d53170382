//! LIBSVM / SVMlight sparse classification files:
//!
//! ```text
//! <label> <index>:<value> <index>:<value> ...
//! ```
//!
//! Indices are 1-based in the file and strictly increasing within a line.
//! Labels must be `+1`/`-1` or `1`/`0`; `0` is mapped to `-1`.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A sparse binary classification dataset with 0-based feature indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset {
    pub n_features: usize,
    pub labels: Vec<f64>,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseDataset {
    pub fn new(n_features: usize, labels: Vec<f64>, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if labels.len() != rows.len() {
            return Err(Error::DimensionMismatch { expected: labels.len(), got: rows.len() });
        }
        for (i, (y, row)) in labels.iter().zip(&rows).enumerate() {
            if *y != 1.0 && *y != -1.0 {
                return Err(Error::Data(format!("sample {i}: label {y} is not +-1")));
            }
            if row.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::Data(format!("sample {i}: feature indices not increasing")));
            }
            if let Some((j, _)) = row.last() {
                if *j >= n_features {
                    return Err(Error::Data(format!(
                        "sample {i}: feature {j} outside {n_features} features"
                    )));
                }
            }
        }
        Ok(SparseDataset { n_features, labels, rows })
    }

    /// Builds a dataset from dense rows, dropping exact zeros.
    pub fn from_dense(features: &[Vec<f64>], labels: Vec<f64>) -> Result<Self> {
        let n_features = features.first().map_or(0, Vec::len);
        let rows = features
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j, *v))
                    .collect()
            })
            .collect();
        Self::new(n_features, labels, rows)
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `<w, x_i>`; features beyond `w.len()` contribute nothing.
    pub fn row_dot(&self, i: usize, w: &[f64]) -> f64 {
        self.rows[i]
            .iter()
            .filter(|(j, _)| *j < w.len())
            .map(|(j, v)| w[*j] * v)
            .sum()
    }

    /// Samples selected by `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> SparseDataset {
        SparseDataset {
            n_features: self.n_features,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

/// Reads a LIBSVM file. With `n_features = Some(d)` the dimension is fixed
/// and any index above `d` is an error; otherwise it is the largest index
/// seen.
pub fn load_libsvm(path: impl AsRef<Path>, n_features: Option<usize>) -> Result<SparseDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    let mut max_index = 0usize;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let parse_err = |msg: String| Error::Parse { path: path.to_path_buf(), line: lineno + 1, msg };
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (label, row) = parse_line(content).map_err(parse_err)?;
        if let (Some(d), Some((j, _))) = (n_features, row.last()) {
            if *j >= d {
                return Err(parse_err(format!("feature index {} exceeds declared dimension {d}", j + 1)));
            }
        }
        if let Some((j, _)) = row.last() {
            max_index = max_index.max(j + 1);
        }
        labels.push(label);
        rows.push(row);
    }
    if labels.is_empty() {
        return Err(Error::Data(format!("{}: no samples", path.display())));
    }
    SparseDataset::new(n_features.unwrap_or(max_index), labels, rows)
}

fn parse_line(line: &str) -> std::result::Result<(f64, Vec<(usize, f64)>), String> {
    let mut tokens = line.split_whitespace();
    let raw = tokens.next().ok_or("missing label")?;
    let label = match raw.parse::<f64>() {
        Ok(1.0) => 1.0,
        Ok(v) if v == -1.0 || v == 0.0 => -1.0,
        Ok(v) => return Err(format!("unsupported label {v}")),
        Err(_) => return Err(format!("unparsable label {raw:?}")),
    };
    let mut row: Vec<(usize, f64)> = Vec::new();
    for tok in tokens {
        let (i, v) = tok.split_once(':').ok_or_else(|| format!("expected index:value, got {tok:?}"))?;
        let i: usize = i.parse().map_err(|_| format!("bad feature index {i:?}"))?;
        if i == 0 {
            return Err("feature indices are 1-based".into());
        }
        let v: f64 = v.parse().map_err(|_| format!("bad feature value {v:?}"))?;
        if !v.is_finite() {
            return Err(format!("non-finite feature value {v}"));
        }
        if let Some((prev, _)) = row.last() {
            if i - 1 <= *prev {
                return Err(format!("feature indices not increasing at {i}"));
            }
        }
        row.push((i - 1, v));
    }
    Ok((label, row))
}

/// Writes a dataset in LIBSVM format (labels as `+1`/`-1`).
pub fn write_libsvm(data: &SparseDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for (y, row) in data.labels.iter().zip(&data.rows) {
        let mut line = if *y > 0.0 { "+1".to_string() } else { "-1".to_string() };
        for (j, v) in row {
            line.push_str(&format!(" {}:{}", j + 1, v));
        }
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file_with(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_basic_line() {
        let f = file_with("+1 1:0.5 3:1.0\n");
        let d = load_libsvm(f.path(), None).unwrap();
        assert_eq!(d.labels, vec![1.0]);
        assert_eq!(d.rows[0], vec![(0, 0.5), (2, 1.0)]);
        assert_eq!(d.n_features, 3);
    }

    #[test]
    fn zero_label_maps_to_minus_one() {
        let f = file_with("0 2:1\n1 1:2\n");
        let d = load_libsvm(f.path(), None).unwrap();
        assert_eq!(d.labels, vec![-1.0, 1.0]);
    }

    #[test]
    fn rejects_malformed_with_line_numbers() {
        for (content, line) in [
            ("+1 1:0.5\n-1 3:x\n", 2),
            ("+1 3:1 2:1\n", 1),
            ("+1 1:1\n\n+1 0:1\n", 3),
            ("abc 1:1\n", 1),
            ("+1 1-2\n", 1),
            ("2 1:1\n", 1),
        ] {
            match load_libsvm(file_with(content).path(), None) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{content:?}"),
                other => panic!("{content:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(load_libsvm(file_with("\n  \n").path(), None).is_err());
    }

    #[test]
    fn dimension_override() {
        let f = file_with("+1 1:1 3:1\n");
        assert_eq!(load_libsvm(f.path(), Some(123)).unwrap().n_features, 123);
        assert!(load_libsvm(f.path(), Some(2)).is_err());
    }

    #[test]
    fn missing_file_reports_io() {
        assert!(matches!(load_libsvm("/nonexistent/file", None), Err(Error::Io { .. })));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn dataset() -> impl Strategy<Value = SparseDataset> {
            let row = proptest::collection::btree_map(0usize..20, -1e3..1e3f64, 0..6);
            proptest::collection::vec((any::<bool>(), row), 1..30).prop_map(|rows| {
                let labels = rows.iter().map(|(y, _)| if *y { 1.0 } else { -1.0 }).collect();
                let rows = rows
                    .into_iter()
                    .map(|(_, r)| r.into_iter().filter(|(_, v)| *v != 0.0).collect())
                    .collect();
                SparseDataset::new(20, labels, rows).unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn write_then_load_round_trips(data in dataset()) {
                let dir = tempfile::tempdir().unwrap();
                let path = dir.path().join("d.libsvm");
                write_libsvm(&data, &path).unwrap();
                let back = load_libsvm(&path, Some(20)).unwrap();
                prop_assert_eq!(back.labels, data.labels);
                prop_assert_eq!(back.rows, data.rows);
            }
        }
    }
}
