//! Dataset readers and writers: LIBSVM text and dense CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use thiserror::Error;

use super::{CsrMatrix, DesignMatrix, LassoProblem, LogisticProblem, ProblemError};
use crate::point::Point;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
    #[error("unsupported label set {0:?}; expected {{-1, +1}}, {{0, 1}} or {{1, 2}}")]
    Labels(Vec<f64>),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

fn open(path: &Path) -> Result<File, LoadError> {
    File::open(path).map_err(|source| LoadError::Io { path: path.to_owned(), source })
}

/// Sparse features and raw labels from LIBSVM text.
#[derive(Clone, Debug, PartialEq)]
pub struct LibsvmData {
    pub features: CsrMatrix,
    pub labels: Vec<f64>,
}

/// Parses `label idx:val idx:val …` lines with 1-based indices. Blank lines
/// and `#` comments are skipped. The column count is the largest index seen
/// unless `n_features` is given.
pub fn read_libsvm<R: Read>(reader: R, n_features: Option<usize>) -> Result<LibsvmData, LoadError> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| LoadError::Parse { line: lineno, msg: e.to_string() })?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label: f64 = label_tok
            .parse()
            .map_err(|_| LoadError::Parse { line: lineno, msg: format!("bad label {label_tok:?}") })?;
        let mut row = Vec::new();
        for tok in tokens {
            let bad = || LoadError::Parse { line: lineno, msg: format!("bad feature {tok:?}") };
            let (idx, val) = tok.split_once(':').ok_or_else(bad)?;
            let idx: usize = idx.parse().map_err(|_| bad())?;
            let val: f64 = val.parse().map_err(|_| bad())?;
            if idx == 0 {
                return Err(LoadError::Parse { line: lineno, msg: "feature indices are 1-based".into() });
            }
            max_index = max_index.max(idx);
            row.push((idx - 1, val));
        }
        rows.push(row);
        labels.push(label);
    }
    let ncols = match n_features {
        Some(n) if n < max_index => {
            return Err(LoadError::Dimension(format!("index {max_index} exceeds {n} features")))
        }
        Some(n) => n,
        None => max_index,
    };
    let features = CsrMatrix::from_rows(ncols, &rows).map_err(|e| LoadError::Dimension(e.to_string()))?;
    Ok(LibsvmData { features, labels })
}

/// Maps labels to `±1`: `{−1, +1}` unchanged, `{0, 1}` sends `0 ↦ −1`,
/// `{1, 2}` sends `1 ↦ +1, 2 ↦ −1`.
pub fn remap_labels(labels: &[f64]) -> Result<Point, LoadError> {
    let mut distinct: Vec<f64> = labels.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let within = |set: &[f64]| distinct.iter().all(|l| set.contains(l));
    let map: fn(f64) -> f64 = if within(&[-1.0, 1.0]) {
        |l| l
    } else if within(&[0.0, 1.0]) {
        |l| if l == 0.0 { -1.0 } else { 1.0 }
    } else if within(&[1.0, 2.0]) {
        |l| if l == 1.0 { 1.0 } else { -1.0 }
    } else {
        return Err(LoadError::Labels(distinct));
    };
    Ok(labels.iter().map(|l| map(*l)).collect())
}

pub fn load_libsvm(path: &Path, nu: f64) -> Result<LogisticProblem, LoadError> {
    let data = read_libsvm(open(path)?, None)?;
    let labels = remap_labels(&data.labels)?;
    Ok(LogisticProblem::new(DesignMatrix::Sparse(data.features), labels, nu)?)
}

pub fn write_libsvm<W: Write>(out: W, features: &DesignMatrix, labels: &Point) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    let sparse = features.to_sparse();
    for (i, label) in labels.iter().enumerate() {
        write!(out, "{}", if *label > 0.0 { "+1" } else { "-1" })?;
        for (j, v) in sparse.row(i) {
            write!(out, " {}:{}", j + 1, v)?;
        }
        writeln!(out)?;
    }
    out.flush()
}

fn read_csv_rows(path: &Path, skip_header: bool) -> Result<Vec<Vec<f64>>, LoadError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(skip_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let offset = if skip_header { 2 } else { 1 };
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + offset;
        let rec = rec.map_err(|e| LoadError::Parse { line, msg: e.to_string() })?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| LoadError::Parse { line, msg: format!("bad number {f:?}") }))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Reads `A` (one numeric row per line) and `b` (one value per line) from
/// comma-separated files. `skip_header` drops the first line of each.
pub fn load_dense_csv(path_a: &Path, path_b: &Path, nu: f64, skip_header: bool) -> Result<LassoProblem, LoadError> {
    let rows = read_csv_rows(path_a, skip_header)?;
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(LoadError::Dimension(format!(
            "row {} of {} has {} columns, expected {ncols}",
            i + 1,
            path_a.display(),
            rows[i].len()
        )));
    }
    let a = Array2::from_shape_vec((rows.len(), ncols), rows.concat())
        .map_err(|e| LoadError::Dimension(e.to_string()))?;
    let b_rows = read_csv_rows(path_b, skip_header)?;
    if let Some(i) = b_rows.iter().position(|r| r.len() != 1) {
        return Err(LoadError::Dimension(format!("row {} of {} is not a single value", i + 1, path_b.display())));
    }
    let b: Point = b_rows.into_iter().map(|r| r[0]).collect();
    if b.len() != a.nrows() {
        return Err(LoadError::Dimension(format!("A has {} rows but b has {}", a.nrows(), b.len())));
    }
    Ok(LassoProblem::new(DesignMatrix::Dense(a), b, nu)?)
}

pub fn write_dense_csv(path_a: &Path, path_b: &Path, a: &DesignMatrix, b: &Point) -> Result<(), LoadError> {
    fn io(path: &Path) -> impl Fn(csv::Error) -> LoadError + '_ {
        move |e| LoadError::Io { path: path.to_owned(), source: e.into() }
    }
    let mut w = csv::Writer::from_path(path_a).map_err(io(path_a))?;
    for row in a.to_dense().rows() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(io(path_a))?;
    }
    w.flush().map_err(|source| LoadError::Io { path: path_a.to_owned(), source })?;
    let mut w = csv::Writer::from_path(path_b).map_err(io(path_b))?;
    for v in b {
        w.write_record([v.to_string()]).map_err(io(path_b))?;
    }
    w.flush().map_err(|source| LoadError::Io { path: path_b.to_owned(), source })?;
    Ok(())
}
